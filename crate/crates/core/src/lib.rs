//! Gate-level synthesis of integer multipliers.
//!
//! Multipliers are built from two-input gates of a ten-kind basis (every
//! gate costs one), by the school method or by Karatsuba's method over a
//! signed carry-save adder-subtractor. Each construction checks its own
//! column heights and block inventory against closed forms while it is
//! built, and [`verify`] compares the result against a big-integer oracle.
//!
//! ```
//! use mulsynth_core::{synthesize, KaratsubaOptions};
//!
//! let s = synthesize(16, None, KaratsubaOptions::default()).unwrap();
//! assert_eq!(s.gate_count(), 1287);
//! assert_eq!(s.trace, "karatsuba(16)→school(9,8,8)");
//! ```

pub mod blocks;
pub mod bounds;
pub mod error;
pub mod karatsuba;
pub mod ledger;
pub mod netlist;
pub mod school;
pub mod synth;
pub mod verify;

pub use blocks::{BlockCensus, BlockKind};
pub use error::SynthError;
pub use karatsuba::KaratsubaOptions;
pub use netlist::text::{export_text, import_text, ImportError};
pub use netlist::{GateKind, Netlist, NetlistBuilder, WireRef};
pub use synth::{build_auto, build_karatsuba, build_school, method_policy, synthesize, Method, Synthesis};
pub use verify::{exhaustive_equivalence, oracle_multiply, random_equivalence, Verdict};
