//! Expands a `[plan]` table of dotted keys and value lists into one config per combination.

use toml::{Table, Value};

use crate::config::Violation;

#[derive(Debug, Clone)]
pub struct PlannedRun {
    pub name: String,
    pub assignments: Vec<(String, Value)>,
    pub text: String,
}

fn set_path(root: &mut Table, path: &str, value: Value) -> Result<(), Violation> {
    let keys: Vec<&str> = path.split('.').collect();
    let mut t = root;
    for k in &keys[..keys.len() - 1] {
        let entry = t.entry(k.to_string()).or_insert_with(|| Value::Table(Table::new()));
        t = entry
            .as_table_mut()
            .ok_or_else(|| Violation::new(format!("plan.\"{path}\""), format!("\"{k}\" is not a table")))?;
    }
    t.insert(keys[keys.len() - 1].to_string(), value);
    Ok(())
}

fn render(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Cartesian product over the plan entries in file order, last key varying fastest.
pub fn expand(text: &str) -> Result<Vec<PlannedRun>, Violation> {
    let mut base: Table = text.parse().map_err(|e: toml::de::Error| Violation::new("", e.message().to_owned()))?;
    let plan = match base.remove("plan") {
        Some(Value::Table(t)) => t,
        Some(_) => return Err(Violation::new("plan", "must be a table of key = [values]")),
        None => return Err(Violation::new("plan", "block required for the plan subcommand")),
    };
    let mut axes: Vec<(String, Vec<Value>)> = Vec::new();
    for (k, v) in plan {
        match v {
            Value::Array(a) if !a.is_empty() => axes.push((k, a)),
            _ => return Err(Violation::new(format!("plan.\"{k}\""), "must be a nonempty array")),
        }
    }
    let total: usize = axes.iter().map(|(_, a)| a.len()).product();
    let mut runs = Vec::with_capacity(total);
    for idx in 0..total {
        let mut rem = idx;
        let mut picks = vec![0; axes.len()];
        for (j, (_, a)) in axes.iter().enumerate().rev() {
            picks[j] = rem % a.len();
            rem /= a.len();
        }
        let mut cfg = base.clone();
        let mut assignments = Vec::new();
        for (j, (k, a)) in axes.iter().enumerate() {
            set_path(&mut cfg, k, a[picks[j]].clone())?;
            assignments.push((k.clone(), a[picks[j]].clone()));
        }
        let name = format!("run-{idx:03}");
        cfg.insert("output".into(), Value::String(name.clone()));
        let text = toml::to_string(&cfg).map_err(|e| Violation::new("plan", e.to_string()))?;
        crate::config::parse(&text).map_err(|v| Violation::new(format!("{name}: {}", v.path), v.message))?;
        runs.push(PlannedRun { name, assignments, text });
    }
    Ok(runs)
}

/// `run,<key>...` index of the expansion.
pub fn index_csv(runs: &[PlannedRun]) -> String {
    let mut s = String::from("run");
    if let Some(r) = runs.first() {
        for (k, _) in &r.assignments {
            s.push(',');
            s.push_str(k);
        }
    }
    s.push('\n');
    for r in runs {
        s.push_str(&r.name);
        for (_, v) in &r.assignments {
            s.push(',');
            s.push_str(&render(v));
        }
        s.push('\n');
    }
    s
}
