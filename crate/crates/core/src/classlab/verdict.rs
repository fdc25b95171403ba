use crate::geomkit::Point;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub point: Point,
    pub condition: String,
    pub value: f64,
}

/// Three-valued check result with reproducible witnesses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub status: Status,
    pub witnesses: Vec<Witness>,
}

impl Verdict {
    pub fn pass(point: Point, condition: &str, value: f64) -> Self {
        Verdict { status: Status::Pass, witnesses: vec![Witness { point, condition: condition.into(), value }] }
    }

    pub fn fail(point: Point, condition: &str, value: f64) -> Self {
        Verdict { status: Status::Fail, witnesses: vec![Witness { point, condition: condition.into(), value }] }
    }

    pub fn unknown(point: Point, condition: &str, value: f64) -> Self {
        Verdict {
            status: Status::Unknown,
            witnesses: vec![Witness { point, condition: condition.into(), value }],
        }
    }

    pub fn is_pass(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn is_fail(&self) -> bool {
        self.status == Status::Fail
    }

    /// Conjunction: any FAIL wins, then any UNKNOWN, else PASS. Witnesses of
    /// the deciding status are kept.
    pub fn all(verdicts: impl IntoIterator<Item = Verdict>) -> Verdict {
        let vs: Vec<Verdict> = verdicts.into_iter().collect();
        let status = if vs.iter().any(|v| v.status == Status::Fail) {
            Status::Fail
        } else if vs.iter().any(|v| v.status == Status::Unknown) {
            Status::Unknown
        } else {
            Status::Pass
        };
        let witnesses = vs.into_iter().filter(|v| v.status == status).flat_map(|v| v.witnesses).collect();
        Verdict { status, witnesses }
    }

    pub fn first_witness(&self) -> Option<&Witness> {
        self.witnesses.first()
    }
}
