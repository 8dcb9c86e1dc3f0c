use serde::Serialize;
use stepopt::{PricingResult, StepOptionSpec};

use crate::config::{Format, RunConfig};
use crate::CliError;

/// One line of price output; the column set is shared by every pricing command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub kind: String,
    pub sweep_var: String,
    pub sweep_value: Option<f64>,
    pub v0: Option<f64>,
    pub spot: f64,
    pub strike: f64,
    pub rate: f64,
    pub vol: f64,
    pub tau: f64,
    pub lower_barrier: Option<f64>,
    pub upper_barrier: Option<f64>,
    pub price: f64,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub c3: Option<f64>,
    pub c4: Option<f64>,
    pub c5: Option<f64>,
    pub c6: Option<f64>,
    pub std_error: Option<f64>,
}

impl Row {
    /// Parameter echo for `spec` at `spot`, with no price yet.
    pub fn echo(label: &str, cfg: &RunConfig, spec: &StepOptionSpec, spot: f64) -> Self {
        Row {
            kind: label.to_string(),
            sweep_var: "none".into(),
            sweep_value: None,
            v0: spec.kind.is_step().then_some(spec.v0),
            spot,
            strike: spec.strike,
            rate: cfg.rate,
            vol: cfg.vol,
            tau: spec.tau,
            lower_barrier: spec.kind.is_double_barrier().then_some(spec.lower),
            upper_barrier: spec.kind.has_upper_barrier().then_some(spec.upper),
            price: f64::NAN,
            c1: None,
            c2: None,
            c3: None,
            c4: None,
            c5: None,
            c6: None,
            std_error: None,
        }
    }

    pub fn with_sweep(mut self, var: &str, value: f64) -> Self {
        self.sweep_var = var.to_string();
        self.sweep_value = Some(value);
        self
    }

    /// Copies the price and, for step kinds, the `C1`…`C6` breakdown.
    pub fn with_result(mut self, r: &PricingResult) -> Self {
        self.price = r.price;
        if r.kind.is_step() {
            for c in &r.components {
                let slot = match c.label.as_str() {
                    "C1" => &mut self.c1,
                    "C2" => &mut self.c2,
                    "C3" => &mut self.c3,
                    "C4" => &mut self.c4,
                    "C5" => &mut self.c5,
                    "C6" => &mut self.c6,
                    _ => continue,
                };
                *slot = Some(c.value);
            }
        }
        self
    }
}

pub fn render_rows<T: Serialize>(rows: &[T], format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(rows).map_err(|e| CliError::Output(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
            for r in rows {
                w.serialize(r).map_err(|e| CliError::Output(e.to_string()))?;
            }
            let bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))
        }
    }
}

pub fn render_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Output(e.to_string()))?;
    s.push('\n');
    Ok(s)
}
