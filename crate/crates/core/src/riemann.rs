//! Two-flux Riemann solver: upward jumps follow the convex minorant of `f_ν`,
//! downward jumps the concave majorant of `g_ν`.

use serde::{Deserialize, Serialize};

use crate::flux::{lower_convex_envelope, upper_concave_envelope, PiecewiseAffineFlux};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    /// Upward jump, flux `f`.
    F,
    /// Downward jump, flux `g`.
    G,
}

impl Family {
    pub fn of_jump(u_left: f64, u_right: f64) -> Option<Family> {
        if u_right > u_left {
            Some(Family::F)
        } else if u_right < u_left {
            Some(Family::G)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Front {
    pub position: f64,
    pub speed: f64,
    pub u_left: f64,
    pub u_right: f64,
    pub family: Family,
}

/// Zero-strength threshold `1e-13 · max(1, M)`.
pub fn sigma_min(m: f64) -> f64 {
    1e-13 * m.abs().max(1.0)
}

/// Entropy fan for the jump `u_l -> u_r` placed at `x0`. Equal states give
/// an empty fan.
pub fn solve(
    u_l: f64,
    u_r: f64,
    f_nu: &PiecewiseAffineFlux,
    g_nu: &PiecewiseAffineFlux,
    x0: f64,
) -> Result<Vec<Front>> {
    let Some(family) = Family::of_jump(u_l, u_r) else {
        return Ok(Vec::new());
    };
    let waves = match family {
        Family::F => lower_convex_envelope(f_nu, u_l, u_r)?,
        Family::G => upper_concave_envelope(g_nu, u_l, u_r)?,
    };
    for w in waves.windows(2) {
        if !(w[1].speed > w[0].speed) || w[0].u_right != w[1].u_left {
            return Err(Error::Invariant(format!(
                "Riemann fan {u_l} -> {u_r} has non-increasing speeds {} and {}",
                w[0].speed, w[1].speed
            )));
        }
    }
    Ok(waves
        .into_iter()
        .map(|w| Front {
            position: x0,
            speed: w.speed,
            u_left: w.u_left,
            u_right: w.u_right,
            family,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux::{liu_admissible, sample_flux, Polynomial, SmoothFluxPair};

    fn burgers(nu: u32) -> (PiecewiseAffineFlux, PiecewiseAffineFlux) {
        let pair = SmoothFluxPair::new(
            Polynomial::new(vec![0.0, 0.0, 0.5]),
            Polynomial::new(vec![1.0, 0.0, 0.5]),
            (-2.0, 2.0),
        )
        .unwrap();
        sample_flux(&pair, nu).unwrap()
    }

    #[test]
    fn upward_jump_splits_on_convex_flux() {
        let (f, g) = burgers(1);
        let fan = solve(0.0, 1.0, &f, &g, 0.0).unwrap();
        assert_eq!(fan.len(), 2);
        assert!(fan.iter().all(|fr| fr.family == Family::F));
        assert!((fan[0].speed - 0.25).abs() < 1e-15);
        assert!((fan[1].speed - 0.75).abs() < 1e-15);
        assert_eq!(fan[0].u_right, 0.5);
        assert_eq!(fan[1].u_left, 0.5);
    }

    #[test]
    fn downward_jump_is_single_g_shock() {
        let (f, g) = burgers(8);
        let fan = solve(1.0, 0.0, &f, &g, 2.0).unwrap();
        assert_eq!(fan.len(), 1);
        assert_eq!(fan[0].family, Family::G);
        assert_eq!(fan[0].position, 2.0);
        assert!((fan[0].speed - 0.5).abs() < 1e-14);
    }

    #[test]
    fn equal_states_give_no_fronts() {
        let (f, g) = burgers(4);
        assert!(solve(0.5, 0.5, &f, &g, 0.0).unwrap().is_empty());
    }

    #[test]
    fn out_of_window_state_is_an_error() {
        let (f, g) = burgers(4);
        assert!(matches!(solve(0.0, 5.0, &f, &g, 0.0), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn off_grid_endpoints_become_breakpoints() {
        let (f, g) = burgers(2);
        let fan = solve(0.1, 0.9, &f, &g, 0.0).unwrap();
        assert_eq!(fan.first().unwrap().u_left, 0.1);
        assert_eq!(fan.last().unwrap().u_right, 0.9);
        // nodes 0.25, 0.5, 0.75 are all vertices of a convex polygon
        assert_eq!(fan.len(), 4);
    }

    #[test]
    fn fans_conserve_and_are_admissible() {
        let (f, g) = burgers(5);
        for (ul, ur) in [(-1.3, 0.7), (0.9, -1.1), (0.03, 0.04), (1.5, 1.49)] {
            let fan = solve(ul, ur, &f, &g, 0.0).unwrap();
            let flux = if ur > ul { &f } else { &g };
            let total: f64 = fan.iter().map(|fr| fr.speed * (fr.u_right - fr.u_left)).sum();
            assert!((total - (flux.value(ur) - flux.value(ul))).abs() < 1e-12);
            for fr in &fan {
                assert!(liu_admissible(flux, fr.u_left, fr.u_right).unwrap());
            }
        }
    }
}
