//! Planning engine for flex-grid optical transport networks.
//!
//! The crate routes traffic demands over a fibre topology, places signal
//! regenerators where optical reach runs out, bounds the quality of
//! transmission of every grouped demand with an incoherent Gaussian-noise
//! nonlinear-interference model, and allocates bandwidth-variable
//! transceivers so that the occupied spectrum is minimal. Plans span
//! multiple growth periods; earlier allocations persist and later periods
//! only add capacity.
//!
//! Module map:
//! - [`topology`]: fibre network model and its JSON schema
//! - [`traffic`]: demand generation over planning periods and grouping
//! - [`routing`]: shortest-path routing and regenerator placement
//! - [`qot`]: ASE / nonlinear-interference budgets and GSNR bounds
//! - [`transceiver`]: transceiver catalogs and the allocation solver
//! - [`spectrum`]: flex-grid occupancy and first-fit assignment
//! - [`planner`]: the multi-period workflow and report emission
//!
//! The numerical kernels ([`quad`], [`qot::kernel`]) are generic over the
//! scalar type through `num-traits`; everything else uses [`Real`].

pub mod planner;
pub mod qot;
pub mod quad;
pub mod routing;
pub mod scalar;
pub mod spectrum;
pub mod topology;
pub mod traffic;
pub mod transceiver;
pub mod units;

/// Scalar type used by the concrete domain model and the physics engine.
///
/// The generic kernels in [`quad`] and [`qot::kernel`] accept any
/// [`scalar::Scalar`]; the rest of the crate instantiates them here.
pub type Real = f64;
