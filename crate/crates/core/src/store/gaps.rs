use chrono::NaiveDate;

use super::DailySeries;
use crate::{Error, Result};

/// Turns a day-by-day list with holes into a gap-free series.
///
/// Interior holes are interpolated on the line between the nearest recorded
/// neighbours. Holes before the first recorded day and after the last one
/// become zero.
pub fn fill_gaps_linear(
    uri: impl Into<String>,
    start: NaiveDate,
    values: &[Option<f64>],
) -> Result<DailySeries> {
    let uri = uri.into();
    let known: Vec<usize> = values
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.map(|_| i))
        .collect();
    if known.is_empty() {
        return Err(Error::EmptyInput(format!("series `{uri}` has no recorded day")));
    }

    let mut filled = vec![0.0; values.len()];
    for &i in &known {
        filled[i] = values[i].unwrap_or_default();
    }
    for pair in known.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        if hi - lo < 2 {
            continue;
        }
        let (a, b) = (filled[lo], filled[hi]);
        let span = (hi - lo) as f64;
        for (i, slot) in filled.iter_mut().enumerate().take(hi).skip(lo + 1) {
            let frac = (i - lo) as f64 / span;
            *slot = a + (b - a) * frac;
        }
    }

    Ok(DailySeries {
        uri,
        start,
        values: filled,
        recorded: values.iter().map(Option::is_some).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn start() -> NaiveDate {
        NaiveDate::from_ymd_opt(2012, 3, 1).unwrap()
    }

    fn fill(v: &[Option<f64>]) -> Vec<f64> {
        fill_gaps_linear("t", start(), v).unwrap().values
    }

    #[test]
    fn midpoint() {
        assert_eq!(fill(&[Some(10.0), None, Some(30.0)]), vec![10.0, 20.0, 30.0]);
    }

    #[test]
    fn two_interior_days_follow_the_line() {
        // oracle: y(i) = 10 + (40 - 10) * i / 3
        let expected: Vec<f64> = (0..4).map(|i| 10.0 + 30.0 * i as f64 / 3.0).collect();
        assert_eq!(expected, vec![10.0, 20.0, 30.0, 40.0]);
        assert_eq!(fill(&[Some(10.0), None, None, Some(40.0)]), expected);
    }

    #[test]
    fn leading_holes_are_zero() {
        assert_eq!(fill(&[None, None, Some(7.0)]), vec![0.0, 0.0, 7.0]);
    }

    #[test]
    fn trailing_holes_are_zero() {
        assert_eq!(fill(&[Some(7.0), None]), vec![7.0, 0.0]);
    }

    #[test]
    fn all_missing_is_an_error() {
        assert!(matches!(
            fill_gaps_linear("t", start(), &[None, None]),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn recorded_mask_tracks_input() {
        let s = fill_gaps_linear("t", start(), &[Some(1.0), None, Some(3.0)]).unwrap();
        assert_eq!(s.recorded, vec![true, false, true]);
    }

    proptest! {
        #[test]
        fn idempotent(raw in proptest::collection::vec(proptest::option::of(0.0f64..1e6), 1..40)) {
            prop_assume!(raw.iter().any(Option::is_some));
            let once = fill_gaps_linear("t", start(), &raw).unwrap();
            let again: Vec<Option<f64>> = once.values.iter().copied().map(Some).collect();
            let twice = fill_gaps_linear("t", start(), &again).unwrap();
            prop_assert_eq!(&once.values, &twice.values);
            prop_assert!(once.values.iter().all(|v| *v >= 0.0));
        }
    }
}
