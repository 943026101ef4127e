pub mod classify;
pub mod config;
pub mod connection;
pub mod dense;
pub mod error;
pub mod laurent;
pub mod scalar;
pub mod sparse;
pub mod suite;
pub mod valuation;
pub mod weyl;

pub use config::Config;
pub use connection::{
    coadmissibility_probe, divergence_witness, sufficient_r, verify_witness, NLambdaElement,
    ProbeConfig, ProbeVerdict, WitnessReport, WitnessVerdict,
};
pub use dense::DensePAdic;
pub use error::{Error, Result};
pub use laurent::{LaurentElement, RingTag};
pub use scalar::PAdicScalar;
pub use sparse::SparsePAdic;
pub use valuation::{ExponentBound, ExtValuation};
pub use weyl::OperatorElement;
