//! JSON reports for command results.

use serde::{Deserialize, Serialize};

use crate::contract::Contract;
use crate::refine::{Verdict, Witness};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportBounds {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<usize>,
    pub star: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictSummary {
    pub holds: bool,
    pub bounded: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContractTerms {
    pub pre: Vec<String>,
    pub peri: Vec<String>,
    pub post: Vec<String>,
}

impl ContractTerms {
    /// Term lists in the printed notation. An empty `pre` list means the
    /// precondition is `true_r`; `["false"]` means it is unsatisfiable.
    pub fn of(c: &Contract) -> ContractTerms {
        let pre = if c.pre.is_false() {
            vec!["false".to_string()]
        } else {
            c.pre.terms.iter().map(|t| t.to_string()).collect()
        };
        ContractTerms {
            pre,
            peri: c.peri.terms.iter().map(|t| t.to_string()).collect(),
            post: c.post.terms.iter().map(|t| t.to_string()).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Item {
    pub name: String,
    pub holds: bool,
    pub bounded: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub witnesses: Vec<Witness>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub process: String,
    pub bounds: ReportBounds,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<VerdictSummary>,
    pub witnesses: Vec<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub contract: Option<ContractTerms>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub items: Vec<Item>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(command: &str, process: &str, bounds: ReportBounds) -> Report {
        Report {
            command: command.into(),
            process: process.into(),
            bounds,
            verdict: None,
            witnesses: vec![],
            contract: None,
            items: vec![],
            notes: vec![],
        }
    }

    pub fn with_verdict(mut self, v: &Verdict) -> Report {
        self.verdict = Some(VerdictSummary { holds: v.holds, bounded: v.bounded });
        self.witnesses = v.witnesses.clone();
        self.notes = v.notes.clone();
        self
    }

    pub fn holds(&self) -> bool {
        self.verdict.is_none_or(|v| v.holds)
    }
}
