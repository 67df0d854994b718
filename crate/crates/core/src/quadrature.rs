//! Fixed-order Gauss–Legendre rules on finite intervals.

/// Eight-point Gauss–Legendre nodes on [-1, 1] (positive half) and weights.
const GL8: [(f64, f64); 4] = [
    (0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_5),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_3),
];

/// Eight-point rule on a single interval. Exact for polynomials of degree 15.
pub fn gauss_legendre<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = 0.0;
    for &(x, w) in &GL8 {
        acc += w * (f(mid - half * x) + f(mid + half * x));
    }
    acc * half
}

/// Composite eight-point rule using `pieces` equal subintervals.
pub fn composite<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, pieces: usize) -> f64 {
    if b <= a {
        return 0.0;
    }
    let pieces = pieces.max(1);
    let width = (b - a) / pieces as f64;
    let mut acc = 0.0;
    for i in 0..pieces {
        let lo = a + width * i as f64;
        let hi = if i + 1 == pieces { b } else { lo + width };
        acc += gauss_legendre(&mut f, lo, hi);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        let v = gauss_legendre(|x| x.powi(15) + 3.0 * x * x, 0.0, 2.0);
        let exact = 2f64.powi(16) / 16.0 + 8.0;
        assert!((v - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn composite_exponential() {
        let v = composite(|s| (-s).exp(), 0.0, 10.0, 20);
        assert!((v - (1.0 - (-10f64).exp())).abs() < 1e-14);
    }

    #[test]
    fn empty_interval_is_zero() {
        assert_eq!(gauss_legendre(|_| 1.0, 1.0, 1.0), 0.0);
        assert_eq!(composite(|_| 1.0, 2.0, 1.0, 3), 0.0);
    }
}
