//! Scalar search helpers: golden-section refinement and bracketed bisection.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
///
/// Returns `(x_max, f_max)`. Stops when the bracket is narrower than
/// `tol * max(1, |x|)` or after 200 iterations.
pub fn golden_max<F>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    if a > b {
        std::mem::swap(&mut a, &mut b);
    }
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (b - a).abs() <= tol * c.abs().max(1.0) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Maximum of `f` on `[a, b]`: best of an `n`-point uniform grid, then
/// golden-section refinement inside the two neighbouring cells.
pub fn grid_golden_max<F>(f: F, a: f64, b: f64, n: usize) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let n = n.max(3);
    let h = (b - a) / (n - 1) as f64;
    let node = |i: usize| if i == n - 1 { b } else { a + h * i as f64 };
    let (best_i, best_f) =
        (0..n)
            .map(|i| (i, f(node(i))))
            .fold((0, f64::NEG_INFINITY), |acc, (i, fi)| {
                if fi > acc.1 {
                    (i, fi)
                } else {
                    acc
                }
            });
    let lo = node(best_i.saturating_sub(1));
    let hi = node((best_i + 1).min(n - 1));
    let (x, fx) = golden_max(&f, lo, hi, 1e-14);
    if fx >= best_f {
        (x, fx)
    } else {
        (node(best_i), best_f)
    }
}

/// Root of `f` on a sign-changing bracket `[a, b]`, bisected until the
/// midpoint no longer separates the endpoints. Returns the endpoint with
/// the smaller residual.
pub fn bisect_root<F>(f: F, mut a: f64, mut b: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    let mut fb = fb;
    for _ in 0..2100 {
        let m = 0.5 * (a + b);
        if m <= a.min(b) || m >= a.max(b) {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
            fb = fm;
        }
    }
    if fa.abs() <= fb.abs() {
        a
    } else {
        b
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_vertex() {
        let (x, fx) = golden_max(|x| -(x - 0.3) * (x - 0.3) + 2.0, -1.0, 4.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-6);
        assert!((fx - 2.0).abs() < 1e-12);
    }

    #[test]
    fn grid_golden_handles_endpoint_maximum() {
        let (x, fx) = grid_golden_max(|x| x, 0.0, 2.0, 64);
        assert!((x - 2.0).abs() < 1e-12);
        assert!((fx - 2.0).abs() < 1e-12);
    }

    #[test]
    fn bisection_hits_sqrt2() {
        let r = bisect_root(|x| x * x - 2.0, 0.0, 2.0);
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
    }
}
