//! Dormand–Prince 5(4) with step-size control and Hermite dense output.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("step limit {steps} reached at t = {t}")]
    StepLimit { t: f64, steps: usize },
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("right-hand side left its domain at t = {t}")]
    DomainExit { t: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Zero picks `1e-2 × span`.
    pub initial_step: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            atol: 1e-14,
            max_steps: 100_000,
            initial_step: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub dy: [f64; N],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<const N: usize> {
    pub nodes: Vec<Node<N>>,
    pub steps: usize,
    pub rejected: usize,
    /// Largest accepted scaled local error (≤ 1 by construction).
    pub max_error_estimate: f64,
}

impl<const N: usize> Trajectory<N> {
    pub fn last(&self) -> &Node<N> {
        self.nodes.last().expect("trajectory has the initial node")
    }

    /// Cubic Hermite interpolation between accepted nodes.
    pub fn sample(&self, t: f64) -> [f64; N] {
        let i = match self
            .nodes
            .binary_search_by(|n| n.t.total_cmp(&t))
        {
            Ok(i) => return self.nodes[i].y,
            Err(0) => return self.nodes[0].y,
            Err(i) if i >= self.nodes.len() => return self.last().y,
            Err(i) => i,
        };
        let (a, b) = (&self.nodes[i - 1], &self.nodes[i]);
        let h = b.t - a.t;
        let s = (t - a.t) / h;
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        let mut out = [0.0; N];
        for k in 0..N {
            out[k] = h00 * a.y[k] + h10 * h * a.dy[k] + h01 * b.y[k] + h11 * h * b.dy[k];
        }
        out
    }
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// fifth-order minus embedded fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates `y' = f(t, y)` from `t0` to `t1 > t0`. `f` returns `None`
/// outside its domain; the step is then shrunk, and the integration fails
/// with [`OdeError::DomainExit`] once the step becomes negligible.
pub fn integrate<const N: usize>(
    mut f: impl FnMut(f64, &[f64; N]) -> Option<[f64; N]>,
    t0: f64,
    t1: f64,
    y0: [f64; N],
    opts: &OdeOptions,
) -> Result<Trajectory<N>, OdeError> {
    let span = t1 - t0;
    let min_step = 1e-13 * span.abs().max(f64::MIN_POSITIVE);
    let mut t = t0;
    let mut y = y0;
    let mut dy = f(t, &y).ok_or(OdeError::DomainExit { t })?;
    let mut h = if opts.initial_step > 0.0 {
        opts.initial_step
    } else {
        1e-2 * span
    };
    let mut out = Trajectory {
        nodes: vec![Node { t, y, dy }],
        steps: 0,
        rejected: 0,
        max_error_estimate: 0.0,
    };

    while t < t1 {
        if out.steps + out.rejected >= opts.max_steps {
            return Err(OdeError::StepLimit {
                t,
                steps: opts.max_steps,
            });
        }
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }
        let mut k = [[0.0; N]; 7];
        k[0] = dy;
        let mut inside = true;
        for s in 1..7 {
            let mut ys = y;
            for (i, v) in ys.iter_mut().enumerate() {
                for j in 0..s {
                    *v += h * A[s][j] * k[j][i];
                }
            }
            match f(t + C[s] * h, &ys) {
                Some(d) => k[s] = d,
                None => {
                    inside = false;
                    break;
                }
            }
        }
        if !inside {
            out.rejected += 1;
            h *= 0.25;
            if h < min_step {
                return Err(OdeError::DomainExit { t });
            }
            continue;
        }
        let mut ynew = y;
        for (i, v) in ynew.iter_mut().enumerate() {
            for j in 0..6 {
                *v += h * A[6][j] * k[j][i];
            }
        }
        let mut err2 = 0.0;
        for i in 0..N {
            let e: f64 = h * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>();
            let sc = opts.atol + opts.rtol * y[i].abs().max(ynew[i].abs());
            err2 += (e / sc) * (e / sc);
        }
        let err = (err2 / N as f64).sqrt();
        if !err.is_finite() {
            out.rejected += 1;
            h *= 0.25;
            if h < min_step {
                return Err(OdeError::StepUnderflow { t });
            }
            continue;
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        if err <= 1.0 {
            t = if last { t1 } else { t + h };
            y = ynew;
            // FSAL: stage 7 is f at the new point
            dy = k[6];
            out.steps += 1;
            out.max_error_estimate = out.max_error_estimate.max(err);
            out.nodes.push(Node { t, y, dy });
            h *= factor;
        } else {
            out.rejected += 1;
            h *= factor.min(1.0);
            if h < min_step {
                return Err(OdeError::StepUnderflow { t });
            }
        }
    }
    Ok(out)
}
