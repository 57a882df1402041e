use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("series belong to different sessions ({0} vs {1})")]
    SessionMismatch(u64, u64),
    #[error("{what}: {needed} active generators exceed the cap of {cap}")]
    CapExceeded {
        what: &'static str,
        needed: usize,
        cap: usize,
    },
    #[error("input vector has nonzero imaginary parts")]
    NotReal,
    #[error("sup norm {0} exceeds 1")]
    SupNormExceeded(f64),
    #[error("l2 norm {0} exceeds 1")]
    NormExceeded(f64),
    #[error("l^{p} norm {norm} exceeds 1")]
    PNormExceeded { p: f64, norm: f64 },
    #[error("t = {t} is not above the endpoint c = {c}")]
    TBelowEndpoint { t: f64, c: f64 },
    #[error("m = {0} exceeds the LP dimension cap of 12")]
    DimensionCap(usize),
    #[error("{what}: work {needed} exceeds the cap of {cap}")]
    WorkCap {
        what: &'static str,
        needed: u128,
        cap: u128,
    },
    #[error("slot registry mismatch: {0}")]
    RegistryMismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
