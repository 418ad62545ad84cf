//! Defaults shared by the library checks and the command line.
//!
//! | name                  | value  | used by                                   |
//! |-----------------------|--------|-------------------------------------------|
//! | `DEFAULT_SEED`        | 1729   | sampling, random mixings, verify          |
//! | `DEFAULT_P_CAP`       | 8      | largest accepted `p` (`--max-p` raises it)|
//! | `DEFAULT_SAMPLES`     | 50     | spectral sampling                         |
//! | `DEFAULT_MIXINGS`     | 20     | basis-independence checks                 |
//! | `Tolerances::default` | below  | verify suite                              |
//!
//! Tolerances (all absolute unless stated):
//!
//! | check                | default | measure                                       |
//! |----------------------|---------|-----------------------------------------------|
//! | `dual_route`         | 1e-10   | max entry of Gauss minus Levi-Civita `R`      |
//! | `symmetries`         | 1e-10   | max violation of the curvature symmetries     |
//! | `admissible`         | 1e-9    | max residual of each normal form              |
//! | `basis_independence` | 1e-9    | relative spread of `α` across bases           |
//! | `closed_form`        | 1e-8    | relative error of `α` against the formula     |
//! | `pullback_metric`    | 1e-10   | `‖Ψ*g_Q − g_P‖∞`                              |
//! | `pullback_curvature` | 1e-9    | `‖Ψ*R_Q − R_P‖∞`                              |
//! | `phi_recovery`       | 1e-6    | `‖φ − L‖∞ / ‖L‖∞` after recovery from `R`     |
//! | `finite_difference`  | 1e-5    | `max |exact − fd| / max(|exact|, 1)`, `h=1e-3`|
//! | `embedding`          | 1e-12   | induced metric, normality, shape operator     |

use serde::Serialize;

pub const DEFAULT_SEED: u64 = 1729;
pub const DEFAULT_P_CAP: usize = 8;
pub const DEFAULT_SAMPLES: usize = 50;
pub const DEFAULT_MIXINGS: usize = 20;
pub const SEED_ENV: &str = "CURVHOM_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub dual_route: f64,
    pub symmetries: f64,
    pub admissible: f64,
    pub basis_independence: f64,
    pub closed_form: f64,
    pub pullback_metric: f64,
    pub pullback_curvature: f64,
    pub phi_recovery: f64,
    pub finite_difference: f64,
    pub embedding: f64,
}

impl Default for Tolerances {
    fn default() -> Tolerances {
        Tolerances {
            dual_route: 1e-10,
            symmetries: 1e-10,
            admissible: 1e-9,
            basis_independence: 1e-9,
            closed_form: 1e-8,
            pullback_metric: 1e-10,
            pullback_curvature: 1e-9,
            phi_recovery: 1e-6,
            finite_difference: 1e-5,
            embedding: 1e-12,
        }
    }
}

impl Tolerances {
    /// Every tolerance set to `tol`.
    pub fn uniform(tol: f64) -> Tolerances {
        Tolerances {
            dual_route: tol,
            symmetries: tol,
            admissible: tol,
            basis_independence: tol,
            closed_form: tol,
            pullback_metric: tol,
            pullback_curvature: tol,
            phi_recovery: tol,
            finite_difference: tol,
            embedding: tol,
        }
    }
}
