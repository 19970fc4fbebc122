//! Entropies, Fisher informations, deficits and inequality checks.

mod diagnostics;
mod sphere;
mod stability;

pub use diagnostics::{free_diagnostics, relative_pair, sandwich_eps, DiagnosticsRecord, RelativePair};
pub use sphere::{sphere_gns_deficit, sphere_improved_deficit};
pub use stability::{gns_stability, heisenberg_check, BestMatch, StabilityReport};
