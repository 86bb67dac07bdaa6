//! Machine-readable result documents: versioned JSON and a long-format CSV
//! carrying the same numbers.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{PagError, Result};
use crate::exact::{strategy_space_volume, EnumerationOptions, EquilibriumClass, VolumeEstimate};
use crate::model::StateVector;
use crate::scenario::Scenario;
use crate::sim::{LikelihoodReport, SimConfig, SimulationSummary};

pub const SCHEMA_VERSION: u32 = 1;

/// SHA-256 of the canonical scenario text.
pub fn scenario_digest(scenario: &Scenario) -> String {
    hex::encode(Sha256::digest(scenario.to_text().as_bytes()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassRecord {
    pub label: StateVector,
    /// Each polytope as a list of constraints over the named variables.
    pub polytopes: Vec<Vec<String>>,
    pub volume: Option<VolumeEstimate>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnumerationReport {
    pub options: EnumerationOptions,
    pub variables: Vec<String>,
    pub strategy_space_volume: f64,
    pub classes: Vec<ClassRecord>,
}

impl EnumerationReport {
    pub fn new(scenario: &Scenario, options: &EnumerationOptions, classes: &[EquilibriumClass]) -> Self {
        let flat = scenario.graph.flat_index();
        let name = |k: usize| flat.name(k);
        EnumerationReport {
            options: options.clone(),
            variables: (0..flat.len()).map(name).collect(),
            strategy_space_volume: strategy_space_volume(&scenario.graph),
            classes: classes
                .iter()
                .map(|c| ClassRecord {
                    label: c.label.clone(),
                    polytopes: c.polytopes.iter().map(|p| p.render(&name)).collect(),
                    volume: c.volume.clone(),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub config: SimConfig,
    pub summary: SimulationSummary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema_version: u32,
    pub tool_version: String,
    pub scenario_digest: String,
    pub countries: Vec<String>,
    pub enumeration: Option<EnumerationReport>,
    pub simulation: Option<SimulationReport>,
}

impl ReportDocument {
    pub fn new(scenario: &Scenario) -> Self {
        ReportDocument {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            scenario_digest: scenario_digest(scenario),
            countries: (0..scenario.n()).map(|i| scenario.name(i)).collect(),
            enumeration: None,
            simulation: None,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self).map_err(|e| PagError::Report(e.to_string()))?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ReportDocument = serde_json::from_str(text).map_err(|e| PagError::Report(e.to_string()))?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(PagError::Report(format!(
                "unsupported schema version {} (expected {SCHEMA_VERSION})",
                doc.schema_version
            )));
        }
        Ok(doc)
    }

    /// Long format: `section,class,country,metric,value`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut put = |section: &str, class: &str, country: &str, metric: &str, value: String| {
            w.write_record([section, class, country, metric, value.as_str()])
        };
        let fail = |e: csv::Error| PagError::Report(e.to_string());
        put("section", "class", "country", "metric", "value".into()).map_err(fail)?;
        put("meta", "", "", "schema_version", self.schema_version.to_string()).map_err(fail)?;
        put("meta", "", "", "scenario_digest", self.scenario_digest.clone()).map_err(fail)?;
        if let Some(e) = &self.enumeration {
            put(
                "enumeration",
                "",
                "",
                "strategy_space_volume",
                e.strategy_space_volume.to_string(),
            )
            .map_err(fail)?;
            put("enumeration", "", "", "classes", e.classes.len().to_string()).map_err(fail)?;
            for c in &e.classes {
                let label = c.label.to_string();
                put("enumeration", &label, "", "polytopes", c.polytopes.len().to_string()).map_err(fail)?;
                if let Some(v) = &c.volume {
                    put("enumeration", &label, "", "volume_hits", v.hits.to_string()).map_err(fail)?;
                    put("enumeration", &label, "", "volume_samples", v.samples.to_string()).map_err(fail)?;
                    put("enumeration", &label, "", "volume", v.estimate.to_string()).map_err(fail)?;
                }
            }
        }
        if let Some(s) = &self.simulation {
            let c = &s.config;
            put("simulation", "", "", "q", c.q.to_string()).map_err(fail)?;
            put("simulation", "", "", "rounds", c.rounds.to_string()).map_err(fail)?;
            put("simulation", "", "", "mode", c.mode.to_string()).map_err(fail)?;
            put("simulation", "", "", "seed", c.seed.to_string()).map_err(fail)?;
            put("simulation", "", "", "converged", s.summary.converged.to_string()).map_err(fail)?;
            put("simulation", "", "", "mean_rounds", s.summary.mean_rounds.to_string()).map_err(fail)?;
            let views = [
                ("all", Some(&s.summary.all)),
                ("converged_only", s.summary.converged_only.as_ref()),
            ];
            for (view, report) in views {
                let Some(r) = report else { continue };
                write_likelihood(&mut put, &format!("simulation.{view}"), &self.countries, r).map_err(fail)?;
            }
        }
        let bytes = w.into_inner().map_err(|e| PagError::Report(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| PagError::Report(e.to_string()))
    }
}

fn write_likelihood<F>(put: &mut F, section: &str, countries: &[String], r: &LikelihoodReport) -> csv::Result<()>
where
    F: FnMut(&str, &str, &str, &str, String) -> csv::Result<()>,
{
    put(section, "", "", "total", r.total.to_string())?;
    for c in &r.classes {
        let label = c.label.to_string();
        put(section, &label, "", "count", c.count.to_string())?;
        put(section, &label, "", "share", c.share.to_string())?;
    }
    for (i, name) in countries.iter().enumerate() {
        put(section, "", name, "survival", r.survival[i].to_string())?;
        put(section, "", name, "safe_only", r.safe_only[i].to_string())?;
    }
    Ok(())
}
