//! Statistical randomness tests from the SP 800-22 battery: the frequency
//! family, runs, longest run, spectral, non-overlapping template, serial,
//! approximate entropy and the random-excursion pair.
//!
//! Each test is exposed twice: an ungated statistic working on a `&[u8]` of
//! 0/1 values (useful on tiny fixtures), and a gated entry point that applies
//! the recommended minimum input sizes and returns a [`TestEntry`].

mod excursions;
mod frequency;
mod serial;
mod spectral;
mod template;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::bits::BitStream;
use crate::config::{parse_value, Configurable};
use crate::error::{Error, Result};

pub use excursions::{
    excursion_cycles, random_excursions, random_excursions_p, random_excursions_variant,
    random_excursions_variant_p, ExcursionCycles, EXCURSION_STATES, MIN_CYCLES, VARIANT_STATES,
};
pub use frequency::{
    block_frequency, block_frequency_p, cumulative_sums, cumulative_sums_p, frequency, frequency_p,
    longest_run, longest_run_p, runs, runs_p, LongestRunTable,
};
pub use serial::{approximate_entropy, approximate_entropy_p, phi, psi_squared, serial, serial_p};
pub use spectral::{spectral, spectral_p, spectral_statistic};
pub use template::{aperiodic_templates, non_overlapping_template, template_matches, template_p};

pub const DEFAULT_SIGNIFICANCE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateChoice {
    /// Every aperiodic template of this length.
    AllAperiodic(usize),
    /// One explicit template.
    Single(Vec<u8>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestParams {
    pub block_length: usize,
    pub template: TemplateChoice,
    pub template_blocks: usize,
    pub serial_m: usize,
    pub apen_m: usize,
    pub significance: f64,
}

impl Default for TestParams {
    fn default() -> Self {
        TestParams {
            block_length: 128,
            template: TemplateChoice::AllAperiodic(9),
            template_blocks: 8,
            serial_m: 16,
            apen_m: 10,
            significance: DEFAULT_SIGNIFICANCE,
        }
    }
}

impl TestParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.significance > 0.0 && self.significance < 1.0) {
            return Err(Error::param("significance", "must lie in (0, 1)"));
        }
        let lens = [
            ("block_length", self.block_length),
            ("template_blocks", self.template_blocks),
            ("serial_m", self.serial_m),
            ("apen_m", self.apen_m),
        ];
        for (name, v) in lens {
            if v == 0 {
                return Err(Error::param(name, "must be at least 1"));
            }
        }
        match &self.template {
            TemplateChoice::AllAperiodic(0) => return Err(Error::param("template", "length must be at least 1")),
            TemplateChoice::AllAperiodic(m) if *m > 16 => {
                return Err(Error::param("template", "length above 16 is not supported"))
            }
            TemplateChoice::Single(t) if t.is_empty() || t.iter().any(|&b| b > 1) => {
                return Err(Error::param("template", "must be a non-empty 0/1 pattern"))
            }
            _ => {}
        }
        Ok(())
    }

    pub fn key_values(&self) -> Vec<(&'static str, String)> {
        vec![
            ("block_length", self.block_length.to_string()),
            (
                "template",
                match &self.template {
                    TemplateChoice::AllAperiodic(m) => format!("all{m}"),
                    TemplateChoice::Single(t) => t.iter().map(|b| char::from(b'0' + b)).collect(),
                },
            ),
            ("template_blocks", self.template_blocks.to_string()),
            ("serial_m", self.serial_m.to_string()),
            ("apen_m", self.apen_m.to_string()),
            ("significance", format!("{}", self.significance)),
        ]
    }
}

impl Configurable for TestParams {
    fn set_key(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "block_length" => self.block_length = parse_value(key, value)?,
            "template" => {
                self.template = if let Some(m) = value.strip_prefix("all") {
                    TemplateChoice::AllAperiodic(parse_value(key, m)?)
                } else {
                    let bits = BitStream::from_ascii(value)?;
                    TemplateChoice::Single(bits.to_vec())
                }
            }
            "template_blocks" => self.template_blocks = parse_value(key, value)?,
            "serial_m" => self.serial_m = parse_value(key, value)?,
            "apen_m" => self.apen_m = parse_value(key, value)?,
            "significance" => self.significance = parse_value(key, value)?,
            _ => return Err(Error::UnknownKey(key.to_string())),
        }
        Ok(())
    }
}

/// One row of a [`TestReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestEntry {
    pub test_name: String,
    pub p_values: Vec<f64>,
    pub pass: bool,
    pub applicable: bool,
    pub note: String,
    /// Per-case p-values behind a family-level result (templates, excursion
    /// states), with labels.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sub_results: Vec<(String, f64)>,
}

impl TestEntry {
    pub fn new(name: &str, p_values: Vec<f64>, significance: f64) -> Self {
        let p_values: Vec<f64> = p_values.into_iter().map(|p| p.clamp(0.0, 1.0)).collect();
        let pass = p_values.iter().all(|&p| p >= significance);
        TestEntry {
            test_name: name.to_string(),
            p_values,
            pass,
            applicable: true,
            note: String::new(),
            sub_results: Vec::new(),
        }
    }

    pub fn not_applicable(name: &str, note: impl Into<String>) -> Self {
        TestEntry {
            test_name: name.to_string(),
            p_values: Vec::new(),
            pass: false,
            applicable: false,
            note: note.into(),
            sub_results: Vec::new(),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }
}

/// Šidák-adjusted smallest p-value of a family of `k` tests: the
/// probability that the minimum of `k` independent uniforms is at most
/// `p_min`.
pub fn family_p_value(p_values: &[f64]) -> f64 {
    let k = p_values.len() as f64;
    let p_min = p_values.iter().copied().fold(1.0_f64, f64::min);
    // 1 − (1 − p)^k without cancellation for tiny p
    -((k * (-p_min).ln_1p()).exp_m1())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub n_bits: usize,
    pub significance: f64,
    pub entries: Vec<TestEntry>,
}

impl TestReport {
    /// True when every applicable test passed.
    pub fn all_applicable_pass(&self) -> bool {
        self.entries.iter().filter(|e| e.applicable).all(|e| e.pass)
    }

    pub fn entry(&self, name: &str) -> Option<&TestEntry> {
        self.entries.iter().find(|e| e.test_name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.entries).expect("report serializes")
    }

    /// Plain-text table: number, name, p-value(s), verdict, post-processing.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<3} {:<28} {:<20} {:<10} {}", "#", "Name", "P-value", "Success", "Post-processing");
        for (i, e) in self.entries.iter().enumerate() {
            let p = if e.p_values.is_empty() {
                "-".to_string()
            } else {
                e.p_values.iter().map(|p| format!("{p:.3}")).collect::<Vec<_>>().join(", ")
            };
            let verdict = match (e.applicable, e.pass) {
                (false, _) => "n/a",
                (true, true) => "Success",
                (true, false) => "Failure",
            };
            let _ = writeln!(s, "{:<3} {:<28} {:<20} {:<10} No", i + 1, e.test_name, p, verdict);
        }
        s
    }
}

/// Runs every implemented test on `bits`.
pub fn run_suite(bits: &BitStream, params: &TestParams) -> Result<TestReport> {
    params.validate()?;
    let data = bits.to_vec();
    let entries = vec![
        frequency(&data, params),
        block_frequency(&data, params),
        cumulative_sums(&data, params),
        runs(&data, params),
        longest_run(&data, params),
        spectral(&data, params),
        non_overlapping_template(&data, params),
        serial(&data, params),
        approximate_entropy(&data, params),
        random_excursions(&data, params),
        random_excursions_variant(&data, params),
    ];
    Ok(TestReport { n_bits: bits.len(), significance: params.significance, entries })
}
