//! Intentional analytics over multidimensional cubes.

pub mod catalog;
pub mod cube;
pub mod dimension;
pub mod error;
pub mod extend;
pub mod highlights;
pub mod intents;
pub mod iql;
pub mod models;
pub mod proxies;
pub mod query;
pub mod selection;
pub mod session;

pub use cube::{Axis, Cell, Cube};
pub use dimension::{Dimension, Level, PathTable, ALL_LEVEL, ALL_MEMBER};
pub use error::{Error, Result};
pub use query::{eval_cube_query, AggFn, Aggregate, CubeQuery};
pub use selection::{eval_selection, Atom, CmpOp, Condition, LevelRef};
pub use catalog::{Catalog, SharedCatalog};
pub use highlights::{Highlight, ScoringPlan};
pub use intents::{execute, Context, EnhancedCube};
pub use session::{Session, SessionManager, SubmitError};
