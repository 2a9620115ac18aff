pub mod bounds;
pub mod critical;
pub mod error;
pub mod genericity;
pub mod poly;
pub mod selections;
pub mod slope_bounds;
pub mod subdifferential;
pub mod univariate;

pub use critical::{all_critical_points, CriticalCatalog, CriticalPoint, LocalType, SolverConfig};
pub use error::{CspError, Result};
pub use genericity::{
    certify_1d, genericity_report, random_instance, GenericityReport, GenericityTols,
};
pub use poly::{monomial_count, monomials, Instance, Monomial, Polynomial};
pub use selections::{enumerate_selections_1d, ActiveSet, Selection, SelectionSpec};
pub use subdifferential::{clarke_subdifferential, min_norm_point, slope};
pub use univariate::{real_roots, IntervalRoots, RatPoly, RealRoot, RootRange};
