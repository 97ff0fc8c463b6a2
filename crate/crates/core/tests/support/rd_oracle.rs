// Brute-force rate-distortion for three hypotheses and two actions.
//
// The channel is `x_i = P(a = 0 | theta_i)`. The first two rows run over a
// grid of step 1/`steps`; for each pair the third row is optimised exactly
// over its feasible interval (the distortion is linear and the rate convex
// in `x_2`), so the only error is the grid on two coordinates.

pub fn mutual_information_bits(w: &[f64; 3], x: &[f64; 3]) -> f64 {
    let q0: f64 = w.iter().zip(x).map(|(wi, xi)| wi * xi).sum();
    let q = [q0, 1.0 - q0];
    let mut bits = 0.0;
    for i in 0..3 {
        for (a, p) in [x[i], 1.0 - x[i]].into_iter().enumerate() {
            if p > 0.0 {
                bits += w[i] * p * (p / q[a]).log2();
            }
        }
    }
    bits.max(0.0)
}

pub fn distortion(w: &[f64; 3], d: &[[f64; 2]; 3], x: &[f64; 3]) -> f64 {
    (0..3).map(|i| w[i] * (x[i] * d[i][0] + (1.0 - x[i]) * d[i][1])).sum()
}

pub fn brute_force_rate(w: &[f64; 3], d: &[[f64; 2]; 3], d_max: f64, steps: u32) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..=steps {
        for j in 0..=steps {
            let (x0, x1) = (i as f64 / steps as f64, j as f64 / steps as f64);
            let Some((lo, hi)) = feasible_interval(w, d, d_max, x0, x1) else {
                continue;
            };
            let rate = |x2: f64| mutual_information_bits(w, &[x0, x1, x2]);
            let (mut a, mut b) = (lo, hi);
            for _ in 0..100 {
                let m1 = a + (b - a) / 3.0;
                let m2 = b - (b - a) / 3.0;
                if rate(m1) <= rate(m2) {
                    b = m2;
                } else {
                    a = m1;
                }
            }
            best = best.min(rate(0.5 * (a + b))).min(rate(lo)).min(rate(hi));
        }
    }
    best
}

// Values of `x_2` in [0, 1] keeping the distortion within `d_max`.
fn feasible_interval(w: &[f64; 3], d: &[[f64; 2]; 3], d_max: f64, x0: f64, x1: f64) -> Option<(f64, f64)> {
    let fixed = distortion(w, d, &[x0, x1, 0.0]);
    let slope = w[2] * (d[2][0] - d[2][1]);
    let room = d_max - fixed;
    if slope == 0.0 {
        return (room >= 0.0).then_some((0.0, 1.0));
    }
    let edge = room / slope;
    let (lo, hi) = if slope > 0.0 { (0.0, edge.min(1.0)) } else { (edge.max(0.0), 1.0) };
    (lo <= hi).then_some((lo, hi))
}

/// Exhaustive search over the full grid, no inner optimisation.
pub fn grid_rate(w: &[f64; 3], d: &[[f64; 2]; 3], d_max: f64, steps: u32) -> f64 {
    let mut best = f64::INFINITY;
    let s = steps as f64;
    for i in 0..=steps {
        for j in 0..=steps {
            for k in 0..=steps {
                let x = [i as f64 / s, j as f64 / s, k as f64 / s];
                if distortion(w, d, &x) <= d_max {
                    best = best.min(mutual_information_bits(w, &x));
                }
            }
        }
    }
    best
}
