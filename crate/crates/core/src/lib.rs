//! Cyclic configurations of planar polygonal linkages and the Morse index of
//! their signed area.
//!
//! A linkage is a list of edge lengths; a configuration places its vertices
//! in the plane with `p_1 = (0, 0)` and `p_2 = (0, l_1)`. The critical points
//! of the signed area on the space of configurations are exactly the cyclic
//! configurations (all vertices on one circle). This crate
//!
//! - enumerates every cyclic configuration of a linkage ([`solver`]),
//! - computes the Hessian determinant sign and the Morse index of each one
//!   from closed-form sign rules ([`morse`]),
//! - checks those results against a numerical constrained Hessian
//!   ([`oracle`]), and
//! - follows cyclic configurations along fixed-circle deformations,
//!   logging the events where the sign data changes ([`deform`]).
//!
//! ```
//! use linkmorse::{enumerate_cyclic, Linkage, SolverOptions};
//!
//! let pentagon = Linkage::new(vec![1.0; 5])?;
//! let all = enumerate_cyclic(&pentagon, &SolverOptions::default())?;
//! assert_eq!(all.len(), 14);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod deform;
pub mod geometry;
pub mod linkage;
pub mod morse;
pub mod oracle;
pub mod solver;

pub use deform::{
    check_lemmas, deform, detect_events, vertex_angles, AngularPath, DeformError, Event, EventKind,
    EventOptions, LemmaOptions, LemmaReport, LemmaViolation, Snapshot,
};
pub use geometry::{
    edge_orientations, fit_circle, measure_half_angles, signed_area, CircleFit, GeometryError,
    HalfAngles, OrientationString, Point, Sign,
};
pub use linkage::{validate_configuration, Configuration, Linkage, LinkageError, Violation};
pub use morse::{
    morse_index, morse_index_on, stable_morse_index, IndexRoute, MorseError, MorseReport,
    SignReport,
};
pub use oracle::{oracle_index, reframed_inertia, random_rotation, Inertia, OracleError, OracleOptions, OracleVerdict};
pub use solver::{
    enumerate_cyclic, f_derivative, f_value, reconstruct, solve_radii, CyclicConfiguration,
    CyclicDescriptor, DegeneracyFlags, RadiusRoot, SolverError, SolverOptions,
};

// The book's snippets run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/linkages.md")]
    mod linkages {}
    #[doc = include_str!("../../../book/src/cyclic.md")]
    mod cyclic {}
    #[doc = include_str!("../../../book/src/morse.md")]
    mod morse {}
    #[doc = include_str!("../../../book/src/oracle.md")]
    mod oracle {}
    #[doc = include_str!("../../../book/src/deformation.md")]
    mod deformation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
