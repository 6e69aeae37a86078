//! Discretized flat-torus geometry: grids, fields, a field-expression
//! parser, differential forms with Hodge duality, vielbeins and quadrature.

pub mod expr;
pub mod field;
pub mod forms;
pub mod grid;
pub mod metric;

pub use expr::{parse_field_expr, FieldExpr};
pub use field::{MatrixField, ScalarField, SpinorField};
pub use forms::{gradient, sorted_tuples, volume_form, DifferentialForm};
pub use grid::{DerivMode, TorusGrid};
pub use metric::{integrate, MetricField, Vielbein};
