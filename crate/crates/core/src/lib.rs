pub mod asymptotic;
pub mod budget;
pub mod ergodic;
pub mod error;
pub mod flow;
pub mod hyperbolic;
pub mod matching;
pub mod ode;
pub mod sampling;
pub mod shadowing;
pub mod strips;
pub mod surface;

pub use error::{Error, Result};
pub use surface::{build_collar, curvature_at, sasaki_distance, ChartPoint, CollarProfile, SurfaceModel, UnitTangent};
