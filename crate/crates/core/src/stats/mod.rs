//! Numerical kernels: distribution functions, the indifference-zone integral
//! solvers, and streaming sample statistics.

mod integrals;
mod quadrature;
mod sample;
mod special;

pub use integrals::{
    rinott_h, rinott_integral, yoon_h1, yoon_h1_uncached, yoon_integral, DomainCap, H1Cache,
    IntegralSolverConfig,
};
pub use quadrature::GaussLegendre;
pub use sample::SampleStats;
pub use special::{
    beta_inc, chi2_pdf, chi2_sf, chi2_upper_quantile, gamma_p, gamma_q, ln_gamma, normal_cdf,
    student_t_cdf,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("{function} is undefined at {value}")]
    Domain { function: &'static str, value: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error("invalid integral solver configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("root finding did not converge: {reason}")]
    NoConvergence { reason: &'static str },
}
