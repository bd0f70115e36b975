//! Exact exterior calculus on the flat 3-torus, the Beltrami/Reeb
//! correspondence, and numerical orbit search.

pub mod calculus;
pub mod coeff;
pub mod dsl;
pub mod expr;
pub mod field;
pub mod form;
pub mod grid;
pub mod hydro;
pub mod models;
pub mod orbit;
pub mod scalar;
pub mod trig;

pub use calculus::{cross, curl, flat, hodge, is_volume_preserving, sharp, CalculusError, VolumeCheck};
pub use coeff::Coeff;
pub use dsl::{parse_field_spec, parse_scalar, serialize_field_spec, FieldSpec, ParseDiagnostic};
pub use expr::ExprField;
pub use field::{Metric, MetricError, VectorField, VolumeForm};
pub use form::{ext_d, interior, lie_derivative, wedge, FormError, KForm};
pub use grid::{Certificate, Grid};
pub use models::{abc_field, abc_nonsingular, energy, gauss_certificate, giroux_form, giroux_reeb, ABCParams};
pub use orbit::{
    contractible, find_orbits, integrate, poincare, Orbit, SectionData, SectionPlane, Tolerances, Trajectory,
};
pub use scalar::Scalar;
pub use trig::{Mode, Parity, TrigPoly};
