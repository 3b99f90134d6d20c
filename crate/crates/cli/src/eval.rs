//! Scoring an event stream against simulator ground truth.

use std::ops::Range;

use faultsense::engine::{EventKind, EventRecord};
use faultsense::sim::GroundTruth;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub detected: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detection_delay: Option<u64>,
    pub false_alarms: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_mape: Option<f64>,
    pub events_total: usize,
}

/// Mean absolute percentage error of `eta` against the true time left until
/// `crossing`, over forecasts emitted inside `window` and before `crossing`.
pub fn eta_mape(events: &[EventRecord], crossing: u64, window: Range<u64>) -> Option<f64> {
    let errors: Vec<f64> = events
        .iter()
        .filter(|e| e.kind == EventKind::FaultPredicted && window.contains(&e.t) && e.t < crossing)
        .filter_map(|e| {
            let left = (crossing - e.t) as f64;
            e.eta.map(|eta| (eta - left).abs() / left)
        })
        .collect();
    (!errors.is_empty()).then(|| errors.iter().sum::<f64>() / errors.len() as f64)
}

/// Fault events before the first nonzero echo sample count as false alarms;
/// the first fault event at or after it sets the detection delay.
pub fn evaluate(events: &[EventRecord], truth: &GroundTruth, theta_amp: f64) -> EvalReport {
    let faults: Vec<&EventRecord> = events.iter().filter(|e| e.kind.is_fault()).collect();
    let mut report = EvalReport {
        detected: false,
        detection_delay: None,
        false_alarms: 0,
        eta_mape: None,
        events_total: events.len(),
    };
    let Some(first_exceed) = truth.first_exceed else {
        report.false_alarms = faults.len();
        return report;
    };
    report.false_alarms = faults.iter().filter(|e| e.t < first_exceed).count();
    if let Some(hit) = faults.iter().map(|e| e.t).filter(|&t| t >= first_exceed).min() {
        report.detected = true;
        report.detection_delay = Some(hit - first_exceed);
    }
    if let Some(crossing) = truth.crossing(theta_amp) {
        report.eta_mape = eta_mape(events, crossing, 0..u64::MAX);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(t: u64, kind: EventKind, eta: Option<f64>) -> EventRecord {
        EventRecord {
            t,
            kind,
            score: 0.0,
            eta,
            amplitude: eta.map(|_| 1.0),
            detail: String::new(),
        }
    }

    fn fault_truth() -> GroundTruth {
        GroundTruth {
            fault_onset: Some(4999),
            ramp: Some(1000),
            echo_amp_max: Some(1.0),
            first_exceed: Some(5000),
        }
    }

    #[test]
    fn fault_free_without_events() {
        let r = evaluate(&[ev(10, EventKind::Calibrated, None)], &GroundTruth::default(), 0.5);
        assert_eq!(r.false_alarms, 0);
        assert!(!r.detected);
        assert_eq!(r.events_total, 1);
    }

    #[test]
    fn fault_free_with_events_counts_alarms() {
        let events = [
            ev(10, EventKind::FaultDetected, None),
            ev(20, EventKind::FaultPredicted, Some(5.0)),
        ];
        let r = evaluate(&events, &GroundTruth::default(), 0.5);
        assert_eq!(r.false_alarms, 2);
        assert!(!r.detected);
    }

    #[test]
    fn delay_is_subtraction() {
        let events = [
            ev(100, EventKind::Calibrated, None),
            ev(5600, EventKind::FaultDetected, None),
            ev(5800, EventKind::FaultDetected, None),
        ];
        let r = evaluate(&events, &fault_truth(), 0.5);
        assert!(r.detected);
        assert_eq!(r.detection_delay, Some(600));
        assert_eq!(r.false_alarms, 0);
    }

    #[test]
    fn miss_has_no_delay() {
        let r = evaluate(&[], &fault_truth(), 0.5);
        assert!(!r.detected);
        assert_eq!(r.detection_delay, None);
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(json, r#"{"detected":false,"false_alarms":0,"events_total":0}"#);
    }

    #[test]
    fn mape_over_forecasts_before_crossing() {
        // Crossing at 4999 + 500 = 5499.
        let events = [
            ev(5099, EventKind::FaultPredicted, Some(500.0)),
            ev(5299, EventKind::FaultPredicted, Some(150.0)),
            ev(5600, EventKind::FaultPredicted, Some(10.0)),
        ];
        let r = evaluate(&events, &fault_truth(), 0.5);
        let expected = (100.0 / 400.0 + 50.0 / 200.0) / 2.0;
        assert!((r.eta_mape.unwrap() - expected).abs() < 1e-15);
        assert_eq!(eta_mape(&events, 5499, 5200..5499), Some(0.25));
        assert_eq!(eta_mape(&events, 5499, 0..5000), None);
    }
}
