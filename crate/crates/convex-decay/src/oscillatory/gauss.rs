//! Gauss–Legendre rules on a fixed order ladder, generated once on demand via
//! Newton iteration on the Legendre recurrence.

use std::sync::OnceLock;

/// Available panel orders, smallest to largest. Panels pick the first order
/// that resolves their phase span; the previous rung provides the embedded
/// lower-order value for error estimation.
pub(crate) const ORDERS: [usize; 11] = [8, 12, 16, 24, 32, 48, 64, 96, 128, 160, 192];

/// Largest phase span (radians) a single panel may carry: the top ladder
/// order still integrates e^{iφx} with |φ| ≤ PHASE_CAP to ~1e−13.
pub(crate) const PHASE_CAP: f64 = 270.0;

static RULES: [OnceLock<(Vec<f64>, Vec<f64>)>; ORDERS.len()] =
    [const { OnceLock::new() }; ORDERS.len()];

/// Legendre P_m and its derivative at x.
fn legendre(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn build_rule(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (4 * i + 3) as f64 / (4 * m + 2) as f64).cos();
        for _ in 0..100 {
            let (p, d) = legendre(m, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, d) = legendre(m, x);
        let w = 2.0 / ((1.0 - x * x) * d * d);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }
    (nodes, weights)
}

fn ladder_index(order: usize) -> usize {
    ORDERS
        .iter()
        .position(|&m| m == order)
        .unwrap_or_else(|| panic!("order {order} is not on the ladder"))
}

/// Nodes and weights on [−1, 1] for a ladder order.
pub(crate) fn rule(order: usize) -> &'static (Vec<f64>, Vec<f64>) {
    RULES[ladder_index(order)].get_or_init(|| build_rule(order))
}

/// Smallest ladder order resolving a panel of the given phase span.
pub(crate) fn ladder_order(phase_span: f64) -> usize {
    let half = 0.5 * phase_span.abs();
    let required = half + 9.0 * half.cbrt() + 6.0;
    *ORDERS
        .iter()
        .find(|&&m| m as f64 >= required)
        .unwrap_or(&ORDERS[ORDERS.len() - 1])
}

/// Previous rung, used for the embedded error estimate.
pub(crate) fn lower_order(order: usize) -> usize {
    let i = ladder_index(order);
    ORDERS[i.saturating_sub(1)]
}
