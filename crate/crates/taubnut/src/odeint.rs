//! Adaptive classical Runge-Kutta integration with step-doubling error
//! control, for the numeric ODE cross-checks.

/// One RK4 step.
fn rk4_step<F: Fn(f64, f64) -> f64>(f: &F, x: f64, y: f64, h: f64) -> f64 {
    let k1 = f(x, y);
    let k2 = f(x + h / 2.0, y + h / 2.0 * k1);
    let k3 = f(x + h / 2.0, y + h / 2.0 * k2);
    let k4 = f(x + h, y + h * k3);
    y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// Integrate y' = f(x, y) from (x0, y0) to x1 with per-step tolerance `tol`,
/// comparing one full step against two half steps and adapting the step.
pub fn integrate<F: Fn(f64, f64) -> f64>(f: &F, x0: f64, y0: f64, x1: f64, tol: f64) -> f64 {
    let mut x = x0;
    let mut y = y0;
    let dir = if x1 >= x0 { 1.0 } else { -1.0 };
    let mut h = dir * ((x1 - x0).abs() / 64.0).max(1e-8);
    let mut guard = 0usize;
    while (x1 - x) * dir > 1e-14 {
        guard += 1;
        if guard > 2_000_000 {
            return f64::NAN;
        }
        if (x + h - x1) * dir > 0.0 {
            h = x1 - x;
        }
        let full = rk4_step(f, x, y, h);
        let half = rk4_step(f, x, y, h / 2.0);
        let two = rk4_step(f, x + h / 2.0, half, h / 2.0);
        let err = (two - full).abs() / 15.0;
        let scale = tol * (1.0 + y.abs());
        if err <= scale {
            // fifth-order local extrapolation
            y = two + (two - full) / 15.0;
            x += h;
            let grow = if err > 0.0 {
                0.9 * (scale / err).powf(0.2)
            } else {
                2.0
            };
            h *= grow.clamp(0.5, 2.0);
        } else {
            h *= (0.9 * (scale / err).powf(0.25)).clamp(0.1, 0.9);
        }
    }
    y
}

/// Integrate and sample at the given checkpoints (monotone in x).
pub fn integrate_through<F: Fn(f64, f64) -> f64>(
    f: &F,
    x0: f64,
    y0: f64,
    checkpoints: &[f64],
    tol: f64,
) -> Vec<f64> {
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut x = x0;
    let mut y = y0;
    for &cx in checkpoints {
        y = integrate(f, x, y, cx, tol);
        x = cx;
        out.push(y);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        // y' = -y, y(0) = 1, y(1) = 1/e
        let y1 = integrate(&|_, y| -y, 0.0, 1.0, 1.0, 1e-12);
        assert!((y1 - (-1.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn quadrature() {
        // y' = x^2 from 0 to 3: y = 9
        let y = integrate(&|x, _| x * x, 0.0, 0.0, 3.0, 1e-12);
        assert!((y - 9.0).abs() < 1e-10);
    }
}
