//! Command-line front end, external-model adapters and simulated models for
//! the `transduce` library.

pub mod adapter;
pub mod cli;
pub mod error;
pub mod report;
pub mod simulate;
pub mod stub;
pub mod wire;

pub use adapter::{run_adapter, run_model, Adapter, AdapterSpec, HttpAdapter, StdioAdapter, Transport};
pub use error::{HarnessError, Result};
pub use simulate::{simulate, SimulatedTransducer};
pub use stub::{HttpStub, Stub, StubMode};
pub use wire::{decode_reply, Request};
