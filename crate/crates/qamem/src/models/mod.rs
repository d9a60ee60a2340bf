//! Ready-made memory models: the dissipative hypercube walk, the
//! n-photon driven resonator, and the classical Hopfield baseline.

pub mod hopfield;
pub mod resonator;
pub mod walk;

pub use hopfield::{
    hebbian_couplings, hopfield_update, retrieval_success_rate, sample_retrieval, HopfieldNet,
    HopfieldTrajectory, RetrievalSample,
};
pub use resonator::{
    annihilation, build_resonator, cat_error_correction_run, cat_patterns, coherent_state,
    lobe_basin_projector, lobe_basin_projectors, lobe_classification_experiment, number_operator,
    sector_projector, CatRunReport, CatSet, ClassificationOptions, ClassificationReport,
    QuadratureGrid, ResonatorSpec,
};
pub use walk::{
    bit_string_index, build_walk, collective_z_tail, index_bit_string, leading_z, node_projector,
    walk_retrieval_curve, WalkSpec, WalkSystem,
};
