//! Text and JSON rendering of command results. JSON output is built from
//! fixed-order structures so identical inputs produce byte-identical bytes.

use serde::Serialize;
use voatrace_core::modforms::QuasiModularTermWire;
use voatrace_core::qseries::QSeriesWire;
use voatrace_core::{QSeries, QuasiModular};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Serialize)]
pub struct TraceOutput {
    pub kind: &'static str,
    pub engine: &'static str,
    pub rank: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lattice: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coset: Option<usize>,
    pub state: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f: Option<Vec<QuasiModularTermWire>>,
    pub eta_exponent: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub series: QSeriesWire,
}

impl TraceOutput {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => serde_json::to_string_pretty(self).expect("serializable"),
            Format::Text => {
                let mut out = String::new();
                out.push_str(&format!("state: {}\n", self.state));
                if let Some(lattice) = &self.lattice {
                    out.push_str(&format!(
                        "lattice: {} (coset {})\n",
                        lattice,
                        self.coset.unwrap_or(0)
                    ));
                }
                if let Some(f) = &self.f {
                    let poly = QuasiModular::from_wire(f).expect("wire form");
                    out.push_str(&format!(
                        "f = {}   with Z = f / eta^{}\n",
                        poly, -self.eta_exponent
                    ));
                }
                if let Some(note) = &self.note {
                    out.push_str(&format!("note: {note}\n"));
                }
                let series = QSeries::from_wire(&self.series).expect("wire form");
                out.push_str(&format!("Z = {series}\n"));
                out
            }
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SeriesOutput {
    pub kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lattice: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coset: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub harmonic_degree: Option<u32>,
    pub series: QSeriesWire,
}

impl SeriesOutput {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => serde_json::to_string_pretty(self).expect("serializable"),
            Format::Text => {
                let series = QSeries::from_wire(&self.series).expect("wire form");
                format!("{series}\n")
            }
        }
    }
}
