//! Fractional Cartesian products: covering sequences, the alpha LP, brute-force
//! multilinear functionals, slot-iterated tables and their convolutions, the
//! combinatorial gauge and the random-sign experiment.

pub mod covering;
pub mod eta;
pub mod gauge;
pub mod kfold;
pub mod ksz;
pub mod lp;
pub mod tables;

pub use covering::{standard_form, CoveringSequence};
pub use eta::{eta_bruteforce, eta_bruteforce_capped, tuple_key, tuple_of_key, Theta};
pub use gauge::{psi_gauge, psi_gauge_capped, psi_witness, three_halves_product, three_halves_witness, PointSet};
pub use kfold::{phi_k_parseval, spectral_product, KFoldReport};
pub use ksz::{ksz_demo, KszRecord, KszSigns};
pub use lp::{alpha_lp, format_rational};
pub use tables::{
    build_phi_tuple, build_tables, frac_convolution, frac_convolution_capped, random_unit_argument,
    verify_multilinear, MultilinearReport, SlotRegistry, SlotTable, TableSlot,
};
