//! The universal norm |·|_{F𝒜} of algebras of Kleinian permutation type,
//! computed by exact linear programming over quasi-monomials.

mod class;
mod norm;
mod quasi;
pub mod simplex;

pub use class::{ClassInfo, ConvexityClass};
pub use norm::{fa_norm_exact, fa_norm_upper, theta_ab, theta_k, FaNorm, LpCertificate, NormValue, UpperDecomposition};
pub use quasi::{columns_for, enumerate_quasimonomials, xi_eval, Column, QuasiMonomial, EXHAUSTIVE_CAP};
