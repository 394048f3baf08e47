//! Dormand–Prince 5(4) stepper on a three-component state.

pub type State = [f64; 3];

// Butcher tableau
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// 5th-order minus embedded 4th-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[inline]
fn axpy(y: &State, terms: &[(f64, &State)]) -> State {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..3 {
            out[i] += c * k[i];
        }
    }
    out
}

/// One trial step: the 5th-order solution and the embedded error estimate.
pub fn dopri_step(f: &impl Fn(f64, &State) -> State, t: f64, y: &State, h: f64) -> (State, State) {
    let k1 = f(t, y);
    let k2 = f(t + C2 * h, &axpy(y, &[(h * A21, &k1)]));
    let k3 = f(t + C3 * h, &axpy(y, &[(h * A31, &k1), (h * A32, &k2)]));
    let k4 = f(t + C4 * h, &axpy(y, &[(h * A41, &k1), (h * A42, &k2), (h * A43, &k3)]));
    let k5 = f(
        t + C5 * h,
        &axpy(y, &[(h * A51, &k1), (h * A52, &k2), (h * A53, &k3), (h * A54, &k4)]),
    );
    let k6 = f(
        t + h,
        &axpy(y, &[(h * A61, &k1), (h * A62, &k2), (h * A63, &k3), (h * A64, &k4), (h * A65, &k5)]),
    );
    let y_new = axpy(y, &[(h * B1, &k1), (h * B3, &k3), (h * B4, &k4), (h * B5, &k5), (h * B6, &k6)]);
    let k7 = f(t + h, &y_new);
    let mut err = [0.0; 3];
    for i in 0..3 {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    (y_new, err)
}

/// Scaled max-norm of the error estimate.
pub fn error_norm(err: &State, y: &State, y_new: &State, rel_tol: f64) -> f64 {
    (0..3)
        .map(|i| err[i].abs() / (rel_tol * (1.0 + y[i].abs().max(y_new[i].abs()))))
        .fold(0.0, f64::max)
}

/// Step-size multiplier from a scaled error.
pub fn step_factor(err: f64) -> f64 {
    if err == 0.0 {
        5.0
    } else {
        (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
    }
}

/// Classical RK4 with `n` equal substeps over `[0, span]`.
pub fn rk4_fixed(f: &impl Fn(&State) -> State, y0: &State, span: f64, n: usize) -> State {
    let h = span / n as f64;
    let mut y = *y0;
    for _ in 0..n {
        let k1 = f(&y);
        let k2 = f(&axpy(&y, &[(0.5 * h, &k1)]));
        let k3 = f(&axpy(&y, &[(0.5 * h, &k2)]));
        let k4 = f(&axpy(&y, &[(h, &k3)]));
        y = axpy(&y, &[(h / 6.0, &k1), (h / 3.0, &k2), (h / 3.0, &k3), (h / 6.0, &k4)]);
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dopri_is_fifth_order_on_exponential() {
        let f = |_t: f64, y: &State| [y[0], -2.0 * y[1], 0.5 * y[2]];
        let y0 = [1.0, 1.0, 1.0];
        let errs: Vec<f64> = [0.1, 0.05]
            .iter()
            .map(|&h| {
                let (y, _) = dopri_step(&f, 0.0, &y0, h);
                (y[1] - (-2.0 * h).exp()).abs()
            })
            .collect();
        let order = (errs[0] / errs[1]).log2();
        assert!(order > 5.5, "local order {order}");
    }

    #[test]
    fn rk4_matches_closed_form() {
        let y = rk4_fixed(&|y: &State| [y[0], 0.0, -y[2]], &[1.0, 2.0, 1.0], 1.0, 100);
        assert!((y[0] - 1.0_f64.exp()).abs() < 1e-9);
        assert_eq!(y[1], 2.0);
        assert!((y[2] - (-1.0_f64).exp()).abs() < 1e-9);
    }
}
