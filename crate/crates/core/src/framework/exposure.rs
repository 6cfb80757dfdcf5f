//! Risk aggregation over matched encounter fragments.

use serde::Serialize;

/// Aggregated exposure of one user.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Exposure {
    /// Sum of matched minutes.
    pub risk_minutes: u64,
    /// Whether the risk reaches the threshold.
    pub exposed: bool,
}

/// Sums the minutes of matched fragments (across beacons and intermittent
/// sessions) and applies the exposure threshold.
pub fn aggregate_exposure<I>(matched_minutes: I, threshold_minutes: u64) -> Exposure
where
    I: IntoIterator<Item = u32>,
{
    let risk_minutes: u64 = matched_minutes.into_iter().map(u64::from).sum();
    Exposure {
        risk_minutes,
        exposed: risk_minutes >= threshold_minutes && risk_minutes > 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aggregates_across_rotations_and_sessions() {
        assert_eq!(
            aggregate_exposure([8, 8], 15),
            Exposure {
                risk_minutes: 16,
                exposed: true
            }
        );
        assert_eq!(
            aggregate_exposure([6, 6, 6], 15),
            Exposure {
                risk_minutes: 18,
                exposed: true
            }
        );
        assert!(!aggregate_exposure([14], 15).exposed);
        assert_eq!(
            aggregate_exposure(Vec::<u32>::new(), 15),
            Exposure {
                risk_minutes: 0,
                exposed: false
            }
        );
    }
}
