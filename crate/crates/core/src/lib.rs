//! Exact machinery for nested Schur expansions of 2D Toda tau-functions:
//! partitions and characters, truncated time-variable series, content-product
//! weights, tau expansion, cut-and-join operators, and a Gaussian/unitary
//! matrix-moment oracle.

pub mod cutjoin;
pub mod error;
pub mod memo;
pub mod partitions;
pub mod scalar;
pub mod symfunc;
pub mod tau;
pub mod weights;
pub mod wick;

pub use cutjoin::{
    classical_cutjoin, cutjoin_differential, deriv_operator, diagonal_operator,
    diagonal_operator_inverse, exp_operator_action, mult_operator, recursion_step,
    tau_via_recursion, w_operator, ElementaryChain, LinearOperator,
};
pub use error::{CoreError, Result};
pub use partitions::{
    enumerate_partitions, lr_coefficient, partitions_of, sym_character, z_centralizer,
    FrobeniusCoords, Partition,
};
pub use scalar::{Param, ParamMono, Rat, Scalar};
pub use symfunc::{
    cauchy_kernel, exp_series, from_schur_basis, h_poly, log_series, power_sum, schur,
    schur_components, shift_block, skew_schur, specialize, specialize_block, to_schur_basis,
    BlockId, Exponents, GradedSeries, MultiSeries, SpecializeRule,
};
pub use tau::{
    dual_spec, double_schur_coefficient, expand_tau, expand_tau_restricted, hirota_check,
    reduce_spec, superintegrability_prediction, HirotaReport, NestedSpec, Side, Sign, TauSeries,
};
pub use weights::{c_norm, content_product, eval_G, schur_ratio, ExpPart, WeightGen};
pub use wick::{
    chain_evaluate, chain_evaluate_with_schur, complex_moment, hermitian_moment, unitary_moment,
    weingarten, Attachment, ChainNode, Coupling, CouplingKind, Ensemble, MatrixChainPlan,
    MatrixRef, MomentQuery, NodeKind,
};
