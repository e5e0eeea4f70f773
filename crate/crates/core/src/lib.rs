//! Conformal geometry of the square `K = {|Re w| < 1, |Im w| < 1}`: elliptic
//! special functions, the Schwarz–Christoffel map from the unit disc, the
//! boundary-detour metric `s_K`, hyperbolic distance, and numerical checks of
//! the sharp comparison `s_K ≤ th(ρ_K/2) ≤ C(λ₀)·s_K`.

pub mod analysis;
pub mod certify;
pub mod conformal;
pub mod error;
pub mod hyperbolic;
pub mod quad;
pub mod sampling;
pub mod smetric;
pub mod special_fn;

pub use num_complex::Complex64;

pub use analysis::{
    local_limit, maximize_ratio, ratio, ratio_sample, ratio_sub_square, sharp_constant,
    sigma_restriction_check, verify_theorem, RatioSample, SearchReport, SubSquareConfig,
    SigmaCheckReport, VerifyReport,
};
pub use conformal::{
    conformal_radius, forward_derivative, forward_map, inverse_map, r_of_a,
    schwarz_christoffel_c, DiscPoint, SquarePoint,
};
pub use error::{Error, Result};
pub use hyperbolic::{pseudo_hyp_disc, rho_square, th_half_rho_square, HypDistance};
pub use smetric::{
    boundary_oracle, classify_region, s_metric, Decomposition, RegionLabel, Side,
};
pub use special_fn::{
    agm, b_integral, elliptic_k, jacobi_sn_cn_dn, lambda_for_aspect, rect_constant, Modulus,
    Tolerances, LAMBDA_0,
};
pub use certify::{full_certify, CertReport, CertifyConfig, ProofConstants};
