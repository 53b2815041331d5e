use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("polynomial of degree 0 has no roots")]
    DegreeZero,
    #[error("polynomial degree {0} exceeds the cap of {1}")]
    DegreeCap(usize, usize),
    #[error("division by the zero function")]
    DivisionByZero,
    #[error("evaluation at a pole (s = {re} + {im}j)")]
    EvalAtPole { re: f64, im: f64 },
    #[error("empty impedance list")]
    EmptyList,
    #[error("identically zero element in parallel combination")]
    ZeroElement,
    #[error("degenerate impedance: denominator bracket is identically zero")]
    DegenerateImpedance,
    #[error("degenerate characteristic polynomial")]
    DegenerateCharacteristic,
    #[error("no in-band pole in {lo:.1}..{hi:.1} Hz")]
    NoPoleInBand { lo: f64, hi: f64 },
    #[error("damping ratio undefined at the origin")]
    OriginPole,
    #[error("dominant pole left the band when perturbing {0}")]
    DpLeftBand(String),
    #[error("characteristic function vanishes on the contour near {re} + {im}j")]
    ZeroOnContour { re: f64, im: f64 },
    #[error("invalid parameters: {0}")]
    Invalid(String),
    #[error("simulation blow-up at t = {t:.6} s: |i| = {magnitude:.3e} pu")]
    BlowUp { t: f64, magnitude: f64 },
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}
