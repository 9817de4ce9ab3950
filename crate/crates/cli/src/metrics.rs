use captype_core::Capability;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricError {
    #[error("score needs at least one game")]
    NoGames,
    #[error("{wins} wins and {losses} losses exceed {games} games")]
    TooMany { wins: usize, losses: usize, games: usize },
    #[error("posterior sums to {0}, not 1")]
    NotNormalized(f64),
    #[error("posterior has {got} entries for {labels} labels")]
    Length { got: usize, labels: usize },
}

/// `(wins - losses) / games` as a fraction (multiply by 100 for percent).
pub fn score(wins: usize, losses: usize, games: usize) -> Result<f64, MetricError> {
    if games == 0 {
        return Err(MetricError::NoGames);
    }
    if wins + losses > games {
        return Err(MetricError::TooMany { wins, losses, games });
    }
    Ok((wins as f64 - losses as f64) / games as f64)
}

/// Root of the posterior-weighted squared distance to `truth`.
pub fn deviation(posterior: &[f64], labels: &[Capability], truth: Capability) -> Result<f64, MetricError> {
    if posterior.len() != labels.len() {
        return Err(MetricError::Length {
            got: posterior.len(),
            labels: labels.len(),
        });
    }
    let total: f64 = posterior.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(MetricError::NotNormalized(total));
    }
    let var: f64 = posterior
        .iter()
        .zip(labels)
        .map(|(p, &d)| {
            let gap = d as f64 - truth as f64;
            p * gap * gap
        })
        .sum();
    Ok(var.sqrt())
}

/// Lower median: the middle element, or the smaller middle one for even counts.
pub fn lower_median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Some(sorted[(sorted.len() - 1) / 2])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn score_cases() {
        assert_eq!(score(10, 5, 20).unwrap(), 0.25);
        assert_eq!(score(0, 0, 7).unwrap(), 0.0);
        assert_eq!(score(0, 0, 0), Err(MetricError::NoGames));
        assert!(score(3, 3, 5).is_err());
    }

    /// Published checkers tallies: percent scores must come from integer
    /// win-minus-loss counts over the published game counts.
    #[test]
    fn published_tallies() {
        let pct = |net: i64, games: usize| {
            let (w, l) = if net >= 0 {
                (net as usize, 0)
            } else {
                (0, (-net) as usize)
            };
            (score(w, l, games).unwrap() * 1000.0).round() / 10.0
        };
        assert_eq!(pct(5, 480), 1.0);
        assert_eq!(pct(7, 160), 4.4);
        assert_eq!(pct(32, 960), 3.3);
        // 6.4% of 320 games is 20.48; the neighbouring tallies round to 6.3 and 6.6.
        assert_eq!(pct(20, 320), 6.3);
        assert_eq!(pct(21, 320), 6.6);
    }

    #[test]
    fn deviation_cases() {
        assert_eq!(deviation(&[0.0, 1.0], &[2, 4], 4).unwrap(), 0.0);
        assert!((deviation(&[0.5, 0.5], &[2, 4], 4).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        let u = [0.25; 4];
        assert!((deviation(&u, &[2, 4, 6, 8], 8).unwrap() - 14f64.sqrt()).abs() < 1e-12);
        assert!(matches!(
            deviation(&[0.5, 0.6], &[2, 4], 4),
            Err(MetricError::NotNormalized(_))
        ));
        assert!(deviation(&[1.0], &[2, 4], 4).is_err());
    }

    #[test]
    fn medians() {
        assert_eq!(lower_median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(lower_median(&[4.0, 1.0, 3.0, 2.0]), Some(2.0));
        assert_eq!(lower_median(&[]), None);
    }
}
