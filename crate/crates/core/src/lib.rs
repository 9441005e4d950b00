//! Numerical laboratory for weighted Fock spaces `F_alpha^p` and the
//! generalized Volterra companion operators induced by pairs of entire
//! symbols `(g, psi)`.
//!
//! The crate is organized around six subsystems:
//!
//! * [`symbol`] — a small expression language for entire functions
//!   (polynomials, `exp` of subexpressions, products, powers) with exact
//!   symbolic differentiation, composition, and structural classification.
//! * [`quad`] — deterministic quadrature over the complex plane and along
//!   segments, driven by Gaussian-decay tail certificates.
//! * [`envelope`] — the growth-envelope algebra that turns classified
//!   symbols into tail certificates.
//! * [`fock`] — Fock norms for `0 < p <= inf`, reproducing kernels, and
//!   Littlewood–Paley derivative norms.
//! * [`operators`] — the eight multiplication/integral/composition-type
//!   operators, empirical operator-norm lower bounds, and compactness
//!   probes on kernel test families.
//! * [`criteria`] — the characterizing transforms (`P_psi`, `Q_g`, `M`,
//!   Berezin-type `B`) and the boundedness/compactness verdict engines.
//! * [`lattice`] — r/2-lattices, disc measures for densities and
//!   pushforwards, and the three-way norm equivalence report.

pub mod criteria;
pub mod envelope;
pub mod fock;
pub mod lattice;
pub mod operators;
pub mod quad;
pub mod symbol;

pub use num_complex::Complex64;
