//! Piecewise-linear calibration curves.

use crate::error::{Error, Result};

/// A curve through at least two knots with strictly increasing abscissae.
///
/// Evaluation never extrapolates: queries outside `[first.x, last.x]` fail.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    knots: Vec<(f64, f64)>,
}

impl Curve {
    /// Builds a curve, reporting problems against `field`.
    pub fn new(field: &str, knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::calibration(field, "curve needs at least 2 points"));
        }
        for (i, &(x, y)) in knots.iter().enumerate() {
            if !x.is_finite() || !y.is_finite() {
                return Err(Error::calibration(
                    format!("{field}[{i}]"),
                    "values must be finite",
                ));
            }
        }
        if let Some(i) = knots.windows(2).position(|w| w[1].0 <= w[0].0) {
            return Err(Error::calibration(
                format!("{field}[{}]", i + 1),
                "abscissae must be strictly increasing",
            ));
        }
        Ok(Self { knots })
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    /// `(lo, hi)` abscissa span.
    pub fn span(&self) -> (f64, f64) {
        (self.knots[0].0, self.knots[self.knots.len() - 1].0)
    }

    pub fn contains(&self, x: f64) -> bool {
        let (lo, hi) = self.span();
        x >= lo && x <= hi
    }

    /// Interpolated ordinate at `x`; `what` names the quantity in errors.
    pub fn eval(&self, x: f64, what: &'static str) -> Result<f64> {
        let (lo, hi) = self.span();
        if !(x >= lo && x <= hi) {
            return Err(Error::Extrapolation { what, x, lo, hi });
        }
        // first knot with abscissa >= x
        let i = self.knots.partition_point(|&(kx, _)| kx < x);
        let (x1, y1) = self.knots[i];
        if x1 == x {
            return Ok(y1);
        }
        let (x0, y0) = self.knots[i - 1];
        let t = (x - x0) / (x1 - x0);
        Ok(y0 + t * (y1 - y0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn curve(knots: &[(f64, f64)]) -> Curve {
        Curve::new("test", knots.to_vec()).unwrap()
    }

    #[test]
    fn exact_at_knots() {
        let c = curve(&[(10.0, 3.5), (20.0, 7.25), (65.0, 9.0)]);
        for &(x, y) in c.knots() {
            assert_eq!(c.eval(x, "t").unwrap(), y);
        }
    }

    #[test]
    fn midpoint() {
        let c = curve(&[(10.0, 4.0), (65.0, 10.0)]);
        assert!((c.eval(37.5, "t").unwrap() - 7.0).abs() < 1e-12);
    }

    #[test]
    fn flat_curve_is_constant() {
        let c = curve(&[(1.0, 5.5), (255.0, 5.5)]);
        for x in [1.0, 2.0, 100.5, 255.0] {
            assert_eq!(c.eval(x, "t").unwrap(), 5.5);
        }
    }

    #[test]
    fn refuses_extrapolation() {
        let c = curve(&[(0.0, 20.0), (14.0, 48.0)]);
        assert!(matches!(
            c.eval(-0.1, "t"),
            Err(Error::Extrapolation { .. })
        ));
        assert!(matches!(
            c.eval(14.5, "t"),
            Err(Error::Extrapolation { .. })
        ));
        assert!(c.eval(f64::NAN, "t").is_err());
        assert!((c.eval(7.0, "t").unwrap() - 34.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_knots() {
        assert!(Curve::new("c", vec![(1.0, 1.0)]).is_err());
        assert!(Curve::new("c", vec![(1.0, 1.0), (1.0, 2.0)]).is_err());
        assert!(Curve::new("c", vec![(2.0, 1.0), (1.0, 2.0)]).is_err());
        assert!(Curve::new("c", vec![(1.0, f64::NAN), (2.0, 2.0)]).is_err());
        match Curve::new("states.fs.curve", vec![(1.0, 1.0), (3.0, 1.0), (2.0, 1.0)]) {
            Err(Error::InvalidCalibration { field, .. }) => assert_eq!(field, "states.fs.curve[2]"),
            other => panic!("unexpected {other:?}"),
        }
    }

    fn monotone_knots() -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((0.1f64..10.0, 0.0f64..10.0), 2..8).prop_map(|steps| {
            let mut x = 0.0;
            let mut y = 0.0;
            steps
                .into_iter()
                .map(|(dx, dy)| {
                    x += dx;
                    y += dy;
                    (x, y)
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn monotone_between_knots(knots in monotone_knots(), a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let c = Curve::new("p", knots).unwrap();
            let (lo, hi) = c.span();
            let (a, b) = if a <= b { (a, b) } else { (b, a) };
            let xa = lo + a * (hi - lo);
            let xb = lo + b * (hi - lo);
            let ya = c.eval(xa, "p").unwrap();
            let yb = c.eval(xb, "p").unwrap();
            prop_assert!(ya <= yb + 1e-9);
        }

        #[test]
        fn stays_within_bracketing_knots(knots in monotone_knots(), a in 0.0f64..1.0) {
            let c = Curve::new("p", knots).unwrap();
            let (lo, hi) = c.span();
            let x = lo + a * (hi - lo);
            let y = c.eval(x, "p").unwrap();
            let first = c.knots()[0].1;
            let last = c.knots()[c.knots().len() - 1].1;
            prop_assert!(y >= first - 1e-9 && y <= last + 1e-9);
        }
    }
}
