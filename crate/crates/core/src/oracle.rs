//! Exact quadratic references. Nothing here is accelerated.

use crate::error::Result;
use crate::metric::{DistanceCounter, PointSet};

/// `d(a, B)` for every `a ∈ A`, in point order.
pub fn nearest_distances(
    a: &PointSet,
    b: &PointSet,
    counter: &mut DistanceCounter,
) -> Result<Vec<f64>> {
    a.check_compatible(b)?;
    let metric = a.metric();
    Ok(a.points()
        .map(|p| {
            b.points()
                .map(|q| counter.eval(metric, p, q))
                .fold(f64::INFINITY, f64::min)
        })
        .collect())
}

/// `max_{a∈A} min_{b∈B} d(a, b)`, with exactly |A|·|B| metric calls.
pub fn exact_directed(a: &PointSet, b: &PointSet, counter: &mut DistanceCounter) -> Result<f64> {
    Ok(nearest_distances(a, b, counter)?
        .into_iter()
        .fold(0.0, f64::max))
}

/// Entry `k` is the (k+1)-st largest of the values `d(a, B)`.
pub fn exact_partial_all(
    a: &PointSet,
    b: &PointSet,
    counter: &mut DistanceCounter,
) -> Result<Vec<f64>> {
    let mut d = nearest_distances(a, b, counter)?;
    d.sort_by(|x, y| y.total_cmp(x));
    Ok(d)
}

pub fn exact_hausdorff(a: &PointSet, b: &PointSet, counter: &mut DistanceCounter) -> Result<f64> {
    Ok(exact_directed(a, b, counter)?.max(exact_directed(b, a, counter)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::metric::MetricKind;

    fn set1d(xs: &[f64]) -> PointSet {
        PointSet::new(xs.iter().map(|&x| vec![x]).collect(), MetricKind::L2, "t").unwrap()
    }

    #[test]
    fn directed_examples() {
        let mut c = DistanceCounter::default();
        assert_eq!(
            exact_directed(&set1d(&[0.0, 5.0, 9.0]), &set1d(&[1.0, 8.0]), &mut c).unwrap(),
            3.0
        );
        assert_eq!(c.calls, 6);
        assert_eq!(
            exact_directed(&set1d(&[1.0, 2.0]), &set1d(&[0.0, 1.0, 2.0]), &mut c).unwrap(),
            0.0
        );
        assert_eq!(
            exact_directed(&set1d(&[0.0]), &set1d(&[7.0]), &mut c).unwrap(),
            7.0
        );
    }

    #[test]
    fn partial_examples() {
        let mut c = DistanceCounter::default();
        let a = set1d(&[0.0, 1.0, 2.0, 50.0]);
        let p = exact_partial_all(&a, &set1d(&[0.0]), &mut c).unwrap();
        assert_eq!(p, vec![50.0, 2.0, 1.0, 0.0]);
        assert_eq!(exact_partial_all(&a, &a, &mut c).unwrap(), vec![0.0; 4]);
        assert_eq!(
            exact_partial_all(&set1d(&[3.0]), &a, &mut c).unwrap(),
            vec![1.0]
        );
        let b = set1d(&[0.5, 30.0]);
        assert_eq!(p[0], exact_directed(&a, &set1d(&[0.0]), &mut c).unwrap());
        let q = exact_partial_all(&a, &b, &mut c).unwrap();
        assert_eq!(*q.last().unwrap(), 0.5);
    }

    #[test]
    fn hausdorff_examples() {
        let mut c = DistanceCounter::default();
        let (a, b) = (set1d(&[0.0]), set1d(&[0.0, 100.0]));
        assert_eq!(exact_hausdorff(&a, &b, &mut c).unwrap(), 100.0);
        assert_eq!(exact_hausdorff(&b, &a, &mut c).unwrap(), 100.0);
        assert_eq!(exact_hausdorff(&a, &a, &mut c).unwrap(), 0.0);
    }

    #[test]
    fn mismatch_is_incompatible() {
        let a = set1d(&[0.0]);
        let b = PointSet::new(vec![vec![0.0, 0.0]], MetricKind::L2, "2d").unwrap();
        assert!(matches!(
            exact_directed(&a, &b, &mut DistanceCounter::default()),
            Err(Error::Incompatible(_))
        ));
    }
}
