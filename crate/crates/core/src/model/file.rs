//! JSON scenario files.
//!
//! A file holds the objects `cost`, `grid`, `service` and optionally `run`.
//! Quantities carry their unit in the key suffix, e.g. `"headway_min": 15`
//! or `"headway_h": 0.25`; exactly one spelling per quantity is allowed.

use std::path::Path;

use serde_json::{json, Map, Value};

use super::{
    Catchment, CostParams, GridGeometry, RunConfig, Scenario, ServiceConfig, ValidationErrors,
    Violation,
};

#[derive(Debug, thiserror::Error)]
pub enum ScenarioFileError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("JSON syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("missing object \"{0}\"")]
    MissingObject(&'static str),
    #[error("missing field \"{object}.{field}\"")]
    MissingField { object: &'static str, field: String },
    #[error("unknown field \"{object}.{field}\"")]
    UnknownField { object: String, field: String },
    #[error("field \"{object}.{field}\": {message}")]
    BadValue {
        object: &'static str,
        field: String,
        message: String,
    },
    #[error(transparent)]
    Invalid(#[from] ValidationErrors),
}

type Result<T> = std::result::Result<T, ScenarioFileError>;

#[derive(Clone, Copy)]
enum Unit {
    Plain,
    Length,
    Time,
    Speed,
    PerHour,
    PerKm,
}

impl Unit {
    fn suffixes(self) -> &'static [(&'static str, f64)] {
        match self {
            Unit::Plain => &[("", 1.0)],
            Unit::Length => &[("_km", 1.0), ("_m", 1e-3)],
            Unit::Time => &[("_h", 1.0), ("_min", 1.0 / 60.0), ("_s", 1.0 / 3600.0)],
            Unit::Speed => &[("_kmh", 1.0), ("_mps", 3.6)],
            Unit::PerHour => &[("_per_h", 1.0), ("_per_min", 60.0), ("", 1.0)],
            Unit::PerKm => &[("_per_km", 1.0), ("", 1.0)],
        }
    }
}

struct Section<'a> {
    name: &'static str,
    map: &'a Map<String, Value>,
    used: Vec<String>,
}

impl<'a> Section<'a> {
    fn new(root: &'a Map<String, Value>, name: &'static str) -> Result<Self> {
        match root.get(name) {
            Some(Value::Object(map)) => Ok(Self {
                name,
                map,
                used: Vec::new(),
            }),
            Some(_) => Err(ScenarioFileError::BadValue {
                object: name,
                field: String::new(),
                message: "expected an object".into(),
            }),
            None => Err(ScenarioFileError::MissingObject(name)),
        }
    }

    fn bad(&self, field: &str, message: impl Into<String>) -> ScenarioFileError {
        ScenarioFileError::BadValue {
            object: self.name,
            field: field.to_string(),
            message: message.into(),
        }
    }

    /// Finds the single key spelling `base` with one of the unit's suffixes.
    fn lookup(&mut self, base: &str, unit: Unit) -> Result<Option<(String, &'a Value, f64)>> {
        let mut hit = None;
        for (suffix, factor) in unit.suffixes() {
            let key = format!("{base}{suffix}");
            if let Some(v) = self.map.get(&key) {
                if hit.is_some() {
                    return Err(self.bad(base, "given in more than one unit"));
                }
                hit = Some((key, v, *factor));
            }
        }
        if let Some((key, _, _)) = &hit {
            self.used.push(key.clone());
        }
        Ok(hit)
    }

    fn number(&self, key: &str, v: &Value) -> Result<f64> {
        v.as_f64().ok_or_else(|| self.bad(key, "expected a number"))
    }

    fn opt_quantity(&mut self, base: &str, unit: Unit) -> Result<Option<f64>> {
        match self.lookup(base, unit)? {
            Some((key, v, f)) => Ok(Some(self.number(&key, v)? * f)),
            None => Ok(None),
        }
    }

    fn quantity(&mut self, base: &str, unit: Unit) -> Result<f64> {
        self.opt_quantity(base, unit)?
            .ok_or_else(|| ScenarioFileError::MissingField {
                object: self.name,
                field: base.to_string(),
            })
    }

    fn opt_list(&mut self, base: &str, unit: Unit) -> Result<Option<Vec<f64>>> {
        match self.lookup(base, unit)? {
            Some((key, Value::Array(items), f)) => items
                .iter()
                .map(|v| self.number(&key, v).map(|x| x * f))
                .collect::<Result<Vec<_>>>()
                .map(Some),
            Some((key, _, _)) => Err(self.bad(&key, "expected an array of numbers")),
            None => Ok(None),
        }
    }

    fn list(&mut self, base: &str, unit: Unit) -> Result<Vec<f64>> {
        self.opt_list(base, unit)?
            .ok_or_else(|| ScenarioFileError::MissingField {
                object: self.name,
                field: base.to_string(),
            })
    }

    fn opt_count(&mut self, base: &str) -> Result<Option<u64>> {
        match self.lookup(base, Unit::Plain)? {
            Some((key, v, _)) => v
                .as_u64()
                .map(Some)
                .ok_or_else(|| self.bad(&key, "expected a non-negative integer")),
            None => Ok(None),
        }
    }

    fn count(&mut self, base: &str) -> Result<u64> {
        self.opt_count(base)?
            .ok_or_else(|| ScenarioFileError::MissingField {
                object: self.name,
                field: base.to_string(),
            })
    }

    fn finish(self) -> Result<()> {
        for key in self.map.keys() {
            if !self.used.iter().any(|u| u == key) {
                return Err(ScenarioFileError::UnknownField {
                    object: self.name.to_string(),
                    field: key.clone(),
                });
            }
        }
        Ok(())
    }
}

fn to_u32(section: &Section<'_>, field: &str, v: u64) -> Result<u32> {
    u32::try_from(v).map_err(|_| section.bad(field, "out of range"))
}

/// Parses scenario JSON without validating it.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let root: Value = serde_json::from_str(text).map_err(|e| ScenarioFileError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let root = root.as_object().ok_or(ScenarioFileError::Syntax {
        line: 1,
        column: 1,
        message: "top level must be an object".into(),
    })?;
    for key in root.keys() {
        if !matches!(key.as_str(), "name" | "cost" | "grid" | "service" | "run") {
            return Err(ScenarioFileError::UnknownField {
                object: "<root>".into(),
                field: key.clone(),
            });
        }
    }
    let name = match root.get("name") {
        Some(Value::String(s)) => s.clone(),
        Some(_) => {
            return Err(ScenarioFileError::BadValue {
                object: "<root>",
                field: "name".into(),
                message: "expected a string".into(),
            })
        }
        None => "scenario".into(),
    };

    let mut c = Section::new(root, "cost")?;
    let cost = CostParams {
        gamma_a: c.quantity("gamma_a", Unit::Plain)?,
        gamma_w: c.quantity("gamma_w", Unit::Plain)?,
        gamma_r: c.quantity("gamma_r", Unit::Plain)?,
        gamma_o: c.quantity("gamma_o", Unit::PerKm)?,
        vot: c.quantity("vot", Unit::PerHour)?,
    };
    c.finish()?;

    let mut g = Section::new(root, "grid")?;
    let stop_chainages = g.list("stop_chainages", Unit::Length)?;
    let gl_y = match g.lookup("gl_y", Unit::Length)? {
        Some((key, Value::Array(items), f)) => Catchment::PerStop(
            items
                .iter()
                .map(|v| g.number(&key, v).map(|x| x * f))
                .collect::<Result<Vec<_>>>()?,
        ),
        Some((key, v, f)) => Catchment::Uniform(g.number(&key, v)? * f),
        None => {
            return Err(ScenarioFileError::MissingField {
                object: "grid",
                field: "gl_y".into(),
            })
        }
    };
    let n = stop_chainages.len();
    let grid = GridGeometry {
        l_x: g.quantity("l_x", Unit::Length)?,
        l_y: g.quantity("l_y", Unit::Length)?,
        gl_x: g.quantity("gl_x", Unit::Length)?,
        gl_y,
        stop_weights: g
            .opt_list("stop_weights", Unit::Plain)?
            .unwrap_or_else(|| vec![1.0 / n.max(1) as f64; n]),
        stop_chainages,
        d_xs: g.quantity("d_xs", Unit::Length)?,
    };
    g.finish()?;

    let mut s = Section::new(root, "service")?;
    let capacity = s.count("capacity")?;
    let capacity = to_u32(&s, "capacity", capacity)?;
    let fixed_capacity = match s.opt_count("fixed_capacity")? {
        Some(v) => Some(to_u32(&s, "fixed_capacity", v)?),
        None => None,
    };
    let n_parallel = s.opt_count("n_parallel")?.unwrap_or(1);
    let n_parallel = to_u32(&s, "n_parallel", n_parallel)?;
    let n_zones = s.opt_count("n_zones")?.unwrap_or(1);
    let n_zones = to_u32(&s, "n_zones", n_zones)?;
    let warmup_window = match s.opt_list("warmup_window", Unit::Time)? {
        Some(w) if w.len() == 2 => (w[0], w[1]),
        Some(_) => return Err(s.bad("warmup_window", "expected [start, end]")),
        None => (1.0, 2.0),
    };
    let service = ServiceConfig {
        headway: s.quantity("headway", Unit::Time)?,
        capacity,
        fixed_capacity,
        n_parallel,
        n_zones,
        v_d: s.quantity("v_d", Unit::Speed)?,
        v_w: s.quantity("v_w", Unit::Speed)?,
        v_h: s.opt_quantity("v_h", Unit::Speed)?,
        t_s: s.quantity("t_s", Unit::Time)?,
        t_s_prime: s.quantity("t_s_prime", Unit::Time)?,
        lambda: s.quantity("lambda", Unit::PerHour)?,
        s_o: s.quantity("s_o", Unit::Time)?,
        horizon: s.quantity("horizon", Unit::Time)?,
        warmup_window,
    };
    s.finish()?;

    let run = if root.contains_key("run") {
        let mut r = Section::new(root, "run")?;
        let defaults = RunConfig::default();
        let replications = r.opt_count("replications")?.unwrap_or(defaults.replications as u64);
        let run = RunConfig {
            replications: replications as usize,
            seed: r.opt_count("seed")?.unwrap_or(defaults.seed),
            md: r.opt_quantity("md", Unit::Length)?,
        };
        r.finish()?;
        run
    } else {
        RunConfig::default()
    };

    Ok(Scenario {
        name,
        cost,
        grid,
        service,
        run,
    })
}

/// Reads, parses and validates a scenario file; returns it with any warnings.
pub fn load_scenario(path: &Path) -> Result<(Scenario, Vec<Violation>)> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioFileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let scenario = parse_scenario(&text)?;
    let warnings = scenario.validate()?;
    Ok((scenario, warnings))
}

/// Canonical JSON form: kilometers, hours, km/h.
pub fn scenario_to_json(s: &Scenario) -> Value {
    let gl_y = match &s.grid.gl_y {
        Catchment::Uniform(w) => json!(w),
        Catchment::PerStop(ws) => json!(ws),
    };
    let mut service = json!({
        "headway_h": s.service.headway,
        "capacity": s.service.capacity,
        "n_parallel": s.service.n_parallel,
        "n_zones": s.service.n_zones,
        "v_d_kmh": s.service.v_d,
        "v_w_kmh": s.service.v_w,
        "t_s_h": s.service.t_s,
        "t_s_prime_h": s.service.t_s_prime,
        "lambda_per_h": s.service.lambda,
        "s_o_h": s.service.s_o,
        "horizon_h": s.service.horizon,
        "warmup_window_h": [s.service.warmup_window.0, s.service.warmup_window.1],
    });
    if let Some(fc) = s.service.fixed_capacity {
        service["fixed_capacity"] = json!(fc);
    }
    if let Some(v_h) = s.service.v_h {
        service["v_h_kmh"] = json!(v_h);
    }
    let mut run = json!({
        "replications": s.run.replications,
        "seed": s.run.seed,
    });
    if let Some(md) = s.run.md {
        run["md_km"] = json!(md);
    }
    json!({
        "name": s.name,
        "cost": {
            "gamma_a": s.cost.gamma_a,
            "gamma_w": s.cost.gamma_w,
            "gamma_r": s.cost.gamma_r,
            "gamma_o_per_km": s.cost.gamma_o,
            "vot_per_h": s.cost.vot,
        },
        "grid": {
            "l_x_km": s.grid.l_x,
            "l_y_km": s.grid.l_y,
            "gl_x_km": s.grid.gl_x,
            "gl_y_km": gl_y,
            "stop_chainages_km": s.grid.stop_chainages,
            "stop_weights": s.grid.stop_weights,
            "d_xs_km": s.grid.d_xs,
        },
        "service": service,
        "run": run,
    })
}
