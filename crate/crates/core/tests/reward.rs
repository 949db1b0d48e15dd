use proptest::prelude::*;
use vdg_core::{round_reward, GameParams};

fn params_with(n: usize, r_needed: u32, f: f64, decay_slope: f64) -> GameParams {
    GameParams {
        n,
        r_needed,
        f,
        decay_slope,
        ..GameParams::default()
    }
}

#[test]
fn continuous_at_threshold() {
    let p = GameParams::default();
    let at = round_reward(200, &p);
    assert!((at - 200.0 * 2.0 / 3.0).abs() < 1e-9);
    let above = round_reward(201, &p);
    assert!((above - at - p.decay_slope / 3.0).abs() < 1e-9);
}

#[test]
fn over_branch_slope_by_finite_differences() {
    let p = GameParams::default();
    for t in (201u64..).step_by(37).take(10) {
        let d = round_reward(t + 1, &p) - round_reward(t, &p);
        assert!(
            (d - p.decay_slope / p.n as f64).abs() < 1e-9,
            "total {t}: {d}"
        );
    }
}

#[test]
fn losing_rounds_pay_nothing() {
    let p = GameParams::default();
    for t in [0, 1, 100, 199] {
        assert_eq!(round_reward(t, &p), 0.0);
    }
}

proptest! {
    #[test]
    fn reward_shape(
        n in 1usize..=5,
        r_needed in 1u32..=500,
        f in 0.5f64..=4.0,
        slope in -0.1f64..=0.0,
        below in 1u64..=500,
        excess in 1u64..=2000,
    ) {
        let p = params_with(n, r_needed, f, slope);
        let needed = u64::from(r_needed);
        prop_assert_eq!(round_reward(needed.saturating_sub(below), &p), 0.0);
        let at = round_reward(needed, &p);
        prop_assert!((at - f64::from(r_needed) * f / n as f64).abs() < 1e-9);
        // The over branch extrapolates back to the threshold value.
        let over = round_reward(needed + excess, &p);
        prop_assert!((over - at - slope * excess as f64 / n as f64).abs() < 1e-9);
    }
}
