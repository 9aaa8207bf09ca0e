//! Library side of the `levp` command: method names, matrix sources, run
//! configuration and the quick verification suites.

mod error;
pub mod method;
pub mod run;
pub mod source;
pub mod verify;

pub use error::{Error, Result};
pub use method::{parse_method, MethodOptions};
pub use run::{BenchConfig, MatrixConfig, MethodEntry, RunSettings, Session};
pub use source::{MatrixSource, StartSpec, SyntheticSpec};
