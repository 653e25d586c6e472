//! Wynn's epsilon algorithm for accelerating sequences of partial sums.

use num_complex::Complex64;

/// Accelerated limit of a sequence of partial sums together with an
/// error estimate (difference between the two best diagonal entries).
#[derive(Debug, Clone, Copy)]
pub struct Extrapolation {
    pub value: Complex64,
    pub error: f64,
}

/// Runs the epsilon algorithm on `sums` and returns the deepest even-column
/// entry. With fewer than three terms the last partial sum is returned.
pub fn wynn_epsilon(sums: &[Complex64]) -> Extrapolation {
    let n = sums.len();
    if n == 0 {
        return Extrapolation {
            value: Complex64::new(0.0, 0.0),
            error: f64::INFINITY,
        };
    }
    if n < 3 {
        let last = sums[n - 1];
        let err = if n == 2 {
            (sums[1] - sums[0]).norm()
        } else {
            f64::INFINITY
        };
        return Extrapolation {
            value: last,
            error: err,
        };
    }
    // prev = column j-1, cur = column j; columns shrink by one each step.
    let mut prev: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); n + 1];
    let mut cur: Vec<Complex64> = sums.to_vec();
    let mut best = sums[n - 1];
    let mut best_err = (sums[n - 1] - sums[n - 2]).norm();
    let mut column = 0usize;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        let mut broke = false;
        for k in 0..cur.len() - 1 {
            let diff = cur[k + 1] - cur[k];
            if diff.norm() == 0.0 || !diff.re.is_finite() || !diff.im.is_finite() {
                broke = true;
                break;
            }
            next.push(prev[k + 1] + diff.inv());
        }
        if broke {
            break;
        }
        column += 1;
        if column % 2 == 0 {
            let m = next.len();
            let candidate = next[m - 1];
            if candidate.re.is_finite() && candidate.im.is_finite() {
                let err = if m >= 2 {
                    (next[m - 1] - next[m - 2]).norm()
                } else {
                    (candidate - best).norm()
                };
                if err <= best_err {
                    best = candidate;
                    best_err = err;
                }
            }
        }
        prev = cur;
        cur = next;
    }
    Extrapolation {
        value: best,
        error: best_err,
    }
}

/// Richardson extrapolation to `h -> 0` for values sampled at geometrically
/// shrinking `h` whose error expands in powers `h^order, h^(2 order), ...`.
pub fn richardson(values: &[Complex64], ratio: f64, order: f64) -> Complex64 {
    let mut table: Vec<Complex64> = values.to_vec();
    let mut power = order;
    while table.len() > 1 {
        let factor = ratio.powf(power);
        table = table
            .windows(2)
            .map(|w| (w[1] * factor - w[0]) / (factor - 1.0))
            .collect();
        power += order;
    }
    table[0]
}
