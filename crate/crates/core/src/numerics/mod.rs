//! Riemann-surface numerics: fiber roots, path lifting, loops and regulator quadrature.

pub mod eta;
pub mod forms;
pub mod gamma;
pub mod model;
pub mod path;
pub mod roots;

pub use eta::{integrate_eta, integrate_symbol, pairing, EtaIntegral};
pub use forms::{NumForm, NumMonomial, NumSymbol};
pub use gamma::{build_gamma_loop, safe_parameter, safe_radius, GammaOptions};
pub use model::{EmbeddedConfig, FiberModel, PolyModel};
pub use path::{lift_path, Circle, LiftedLoop, LiftedPath, Tolerances, UPath};
