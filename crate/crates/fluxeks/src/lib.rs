//! Online recovery of an unknown, time-varying wall heat flux from noisy
//! temperature readings taken inside the flow.
//!
//! The estimation target is the heat flux `q(t)` applied to the top wall of a
//! 2D channel carrying fully developed laminar air. A single interior sensor
//! reports temperature once per time step; the library reconstructs `q(t)`
//! from that stream in three interchangeable ways:
//!
//! * **Surrogate Kalman smoothing** ([`pipeline::run_ann_eks`]) — an extended
//!   Kalman filter over a 6-component local state (the sensor temperature,
//!   four cells sampling the wall-to-sensor transport path, and the flux),
//!   with the state transition and its Jacobian served by two small MLPs
//!   trained on forward-solver data, and a fixed-lag RTS backward pass to
//!   undo the sensing delay.
//! * **Full-state Kalman smoothing** ([`pipeline::run_cfd_eks`]) — the same
//!   filter over the complete 1251-component field state, with the transition
//!   computed by the finite-volume solver itself. Accurate but far too slow
//!   for online use; kept as the reference baseline.
//! * **Direct inverse regression** ([`pipeline::run_inverse_ann`]) — an MLP
//!   mapping a window of sensor temperatures straight to the flux.
//!
//! The crate layers cleanly: [`physics`] is the forward solver and ground
//! truth generator, [`signals`] builds flux waveforms, [`dataset`] and
//! [`mlp`] produce the surrogates, [`transfer`] adapts both transition models
//! to one contract, [`kalman`] is the estimator, [`pipeline`] wires the
//! end-to-end inversions, and [`sweep`] runs the parameter studies.
//!
//! A guided tour with runnable examples lives in the `book/` directory of the
//! repository.

pub mod dataset;
pub mod error;
pub mod hash;
pub mod kalman;
pub mod mlp;
pub mod physics;
pub mod pipeline;
pub mod seed;
pub mod signals;
pub mod sweep;
pub mod transfer;

pub use error::{Error, Result};
