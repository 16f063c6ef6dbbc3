//! P1 (Courant) triangle finite elements for penalized mixed obstacle
//! problems on a disk.
//!
//! The crate solves two related fourth-order obstacle problems with nothing
//! but continuous piecewise-linear elements, by way of a penalized mixed
//! reformulation in which the gradient of the transverse deflection is
//! relaxed into an independent vector unknown:
//!
//! * a clamped plate governed by the biharmonic operator, constrained to
//!   stay above an obstacle given as a maximum of affine functions
//!   ([`biharmonic`]);
//! * a flat linearly elastic shallow shell confined to an intersection of
//!   half-spaces ([`shell`]).
//!
//! Both problems minimize a convex energy of the form
//!
//! ```text
//!   elastic part + (1/2κ) ‖gradient gap‖² + (1/2κ) ‖constraint violation‖² + loads
//! ```
//!
//! and are solved by a damped semismooth Newton method ([`nonlinear`]) on
//! top of a small sparse toolkit ([`sparse`]) and shared element kernels
//! ([`fem`]). The [`experiment`] module drives the three study types
//! (penalty sweeps in κ, Cauchy sequences in the mesh size, and force
//! sweeps measuring contact area) and writes CSV/VTK artifacts.
//!
//! Meshes come from [`mesh::build_disk_mesh`]: a hexagon fan uniformly
//! refined with boundary midpoints projected to the circle, so successive
//! resolutions are exactly nested, which the Cauchy-in-h studies rely on.

pub mod biharmonic;
pub mod experiment;
pub mod fem;
pub mod mesh;
pub mod nonlinear;
pub mod shell;
pub mod sparse;
