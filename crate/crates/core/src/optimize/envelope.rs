use crate::error::{Error, Result};

/// Piecewise-linear concave curve through its knots `(R, mu)`.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvelopeCurve {
    knots: Vec<(f64, f64)>,
}

impl EnvelopeCurve {
    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn min_rate(&self) -> f64 {
        self.knots[0].0
    }

    pub fn max_rate(&self) -> f64 {
        self.knots[self.knots.len() - 1].0
    }

    /// Slopes of consecutive segments; strictly decreasing.
    pub fn slopes(&self) -> Vec<f64> {
        self.knots.windows(2).map(|w| slope(w[0], w[1])).collect()
    }

    /// Linear interpolation; `None` outside `[min_rate, max_rate]`.
    pub fn eval(&self, r: f64) -> Option<f64> {
        if !(r >= self.min_rate() && r <= self.max_rate()) {
            return None;
        }
        let i = self.knots.partition_point(|k| k.0 < r);
        if i == 0 {
            return Some(self.knots[0].1);
        }
        let (a, b) = (self.knots[i - 1], self.knots[i]);
        if b.0 == r {
            return Some(b.1);
        }
        Some(a.1 + (b.1 - a.1) * (r - a.0) / (b.0 - a.0))
    }

    /// Slope of the segment used to evaluate at `r` (the right-hand one at
    /// knots); `None` for a single-knot curve or `r` outside the domain.
    pub fn slope_at(&self, r: f64) -> Option<f64> {
        if self.knots.len() < 2 || !(r >= self.min_rate() && r <= self.max_rate()) {
            return None;
        }
        let i = self
            .knots
            .partition_point(|k| k.0 <= r)
            .clamp(1, self.knots.len() - 1);
        Some(slope(self.knots[i - 1], self.knots[i]))
    }

    /// Smallest nondecreasing concave majorant: the curve up to its highest
    /// knot. Evaluate it with [`EnvelopeCurve::eval_monotone`].
    pub fn monotone(&self) -> EnvelopeCurve {
        let top =
            self.knots.iter().enumerate().fold(
                0,
                |best, (i, k)| if k.1 > self.knots[best].1 { i } else { best },
            );
        EnvelopeCurve {
            knots: self.knots[..=top].to_vec(),
        }
    }

    /// Evaluation extended flat beyond the last knot.
    pub fn eval_monotone(&self, r: f64) -> Option<f64> {
        if r > self.max_rate() {
            Some(self.knots[self.knots.len() - 1].1)
        } else {
            self.eval(r)
        }
    }
}

fn slope(a: (f64, f64), b: (f64, f64)) -> f64 {
    (b.1 - a.1) / (b.0 - a.0)
}

/// Upper boundary of the convex hull of `points` between the smallest and
/// the largest abscissa.
pub fn upper_concave_envelope(points: &[(f64, f64)]) -> Result<EnvelopeCurve> {
    if points.is_empty() {
        return Err(Error::Size("envelope of an empty point set".into()));
    }
    if let Some(&(r, m)) = points
        .iter()
        .find(|p| !(p.0.is_finite() && p.1.is_finite()))
    {
        return Err(Error::Domain {
            what: "envelope coordinate",
            value: if r.is_finite() { m } else { r },
        });
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
    sorted.dedup_by(|later, first| later.0 == first.0);
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(sorted.len());
    for p in sorted {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // drop b unless the slope strictly decreases through it
            if slope(b, p) >= slope(a, b) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    Ok(EnvelopeCurve { knots: hull })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        let line =
            upper_concave_envelope(&[(0.0, 0.0), (1.0, 1.0), (2.0, 2.0), (3.0, 3.0)]).unwrap();
        assert_eq!(line.knots(), &[(0.0, 0.0), (3.0, 3.0)]);
        let tent = upper_concave_envelope(&[(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)]).unwrap();
        assert_eq!(tent.knots(), &[(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)]);
        let cup = upper_concave_envelope(&[(0.0, 0.0), (1.0, 0.2), (2.0, 1.0)]).unwrap();
        assert_eq!(cup.knots(), &[(0.0, 0.0), (2.0, 1.0)]);
        assert_eq!(cup.eval(1.0), Some(0.5));
        assert_eq!(cup.eval(2.5), None);
        assert!(upper_concave_envelope(&[]).is_err());
        assert!(upper_concave_envelope(&[(0.0, f64::NAN)]).is_err());
    }

    #[test]
    fn duplicates_keep_the_highest() {
        let e = upper_concave_envelope(&[(1.0, 0.1), (1.0, 0.5), (0.0, 0.0)]).unwrap();
        assert_eq!(e.knots(), &[(0.0, 0.0), (1.0, 0.5)]);
        let single = upper_concave_envelope(&[(0.3, 0.2)]).unwrap();
        assert_eq!(single.eval(0.3), Some(0.2));
        assert_eq!(single.slope_at(0.3), None);
    }

    #[test]
    fn monotone_part() {
        let tent = upper_concave_envelope(&[(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)]).unwrap();
        let m = tent.monotone();
        assert_eq!(m.knots(), &[(0.0, 0.0), (1.0, 1.0)]);
        assert_eq!(m.eval_monotone(5.0), Some(1.0));
        assert_eq!(tent.slope_at(0.5), Some(1.0));
        assert_eq!(tent.slope_at(1.0), Some(-1.0));
    }

    proptest! {
        #[test]
        fn envelope_is_concave_and_dominant(
            pts in prop::collection::vec((0.0f64..1.0, -1.0f64..1.0), 1..60)
        ) {
            let e = upper_concave_envelope(&pts).unwrap();
            let s = e.slopes();
            for w in s.windows(2) {
                prop_assert!(w[1] < w[0]);
            }
            for &(r, m) in &pts {
                prop_assert!(e.eval(r).unwrap() >= m - 1e-12);
            }
            for w in e.knots().windows(2) {
                prop_assert!(w[0].0 < w[1].0);
            }
        }
    }
}
