//! Non-uniform OFDM pilot placement with low delay-domain sidelobes.
//!
//! Periodic pilot combs produce grating lobes in the delay-domain ambiguity
//! function, which a radar receiver sees as ghost targets. This crate picks
//! pilot positions that keep those sidelobes low. Some pilots stay pinned
//! at equispaced anchor positions so the communication receiver can still
//! interpolate the channel.
//!
//! - [`pattern`]: grid numerology, pilot sets, anchors and the lag window.
//! - [`ambiguity`]: difference multiplicities, the ambiguity function and PSL.
//! - [`optimizer`]: greedy construction, SCCD refinement and an exhaustive
//!   oracle for small grids.
//! - [`sensing`]: monostatic sensing simulator and the range-RMSE harness.
//! - [`comm`]: multipath link, channel estimation and the BER harness.
//! - [`experiments`]: configuration and the batch commands behind the CLI.
//!
//! ```
//! use ofdm_pilot::{hybrid_design, make_uniform_comb, psl, OfdmGrid, OptimizerConfig};
//!
//! let grid = OfdmGrid::new(128, 16).unwrap();
//! let cfg = OptimizerConfig { n_anc: 4, ..OptimizerConfig::new(&grid, 16) };
//! let (pattern, trace) = hybrid_design(&grid, &cfg).unwrap();
//! let comb = psl(&make_uniform_comb(&grid, 16).unwrap(), &cfg.window).unwrap();
//! assert!(trace.final_psl_db < comb.db);
//! assert_eq!(pattern.k(), 16);
//! ```

pub mod ambiguity;
pub mod comm;
pub mod error;
pub mod experiments;
pub mod ofdm;
pub mod optimizer;
pub mod pattern;
pub mod qam;
pub mod report;
pub mod seed;
pub mod sensing;

pub use ambiguity::{
    af_direct, af_power_via_dft, delta_psl, difference_multiplicity, psl, psl_after_swap, to_db,
    AfProfile, DifferenceMultiplicity, Psl,
};
pub use error::{Error, Result};
pub use ofdm::{circular_delay, ComplexSequence};
pub use optimizer::{
    exhaustive_oracle, greedy_csm, hybrid_design, sccd_refine, OptimizerConfig, OptimizerTrace,
};
pub use pattern::{
    make_anchor_set, make_uniform_comb, validate_pattern, OfdmGrid, PilotPattern, SidelobeWindow,
};
