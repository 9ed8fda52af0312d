//! Sectioned key-value config files.
//!
//! ```text
//! [domain]
//! x0 = 0
//! x1 = 5
//! ...
//! [forcing]
//! term_count = 1
//! term1_fx_kind = gaussian
//! term1_fx_params = 50, 2.85, 0.075
//! [bc]
//! left = dirichlet:bubble
//! right = neumann0
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::*;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct IniSection {
    pub name: String,
    pub line: usize,
    /// key -> (value, line)
    pub entries: BTreeMap<String, (String, usize)>,
}

impl IniSection {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    pub fn line_of(&self, key: &str) -> usize {
        self.entries.get(key).map_or(self.line, |(_, l)| *l)
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| Error::Config {
            line: self.line,
            message: format!("[{}] is missing '{key}'", self.name),
        })
    }

    pub fn number(&self, key: &str) -> Result<Option<f64>> {
        self.get(key)
            .map(|v| {
                parse_number(v).map_err(|e| Error::Config { line: self.line_of(key), message: e.to_string() })
            })
            .transpose()
    }

    pub fn require_number(&self, key: &str) -> Result<f64> {
        self.require(key)?;
        Ok(self.number(key)?.expect("checked above"))
    }

    pub fn count(&self, key: &str) -> Result<Option<usize>> {
        self.get(key)
            .map(|v| {
                v.trim().parse::<usize>().map_err(|_| Error::Config {
                    line: self.line_of(key),
                    message: format!("'{key}' must be a non-negative integer, got '{v}'"),
                })
            })
            .transpose()
    }

    /// Errors on the first key not accepted by `allowed`.
    pub fn check_keys(&self, allowed: impl Fn(&str) -> bool) -> Result<()> {
        let mut unknown: Vec<_> = self.entries.iter().filter(|(k, _)| !allowed(k)).collect();
        unknown.sort_by_key(|(_, (_, line))| *line);
        match unknown.first() {
            Some((k, (_, line))) => Err(Error::Config {
                line: *line,
                message: format!("unknown key '{k}' in [{}]", self.name),
            }),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Ini {
    pub sections: Vec<IniSection>,
}

impl Ini {
    pub fn parse(text: &str) -> Result<Ini> {
        let mut sections: Vec<IniSection> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let s = raw.trim();
            if s.is_empty() || s.starts_with('#') || s.starts_with(';') {
                continue;
            }
            if let Some(name) = s.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
                let name = name.trim().to_string();
                if sections.iter().any(|sec| sec.name == name) {
                    return Err(Error::Config { line, message: format!("duplicate section [{name}]") });
                }
                sections.push(IniSection { name, line, entries: BTreeMap::new() });
                continue;
            }
            let Some((k, v)) = s.split_once('=') else {
                return Err(Error::Config { line, message: format!("expected 'key = value', got '{s}'") });
            };
            let Some(section) = sections.last_mut() else {
                return Err(Error::Config { line, message: "key outside of any section".into() });
            };
            let key = k.trim().to_string();
            if section.entries.insert(key.clone(), (v.trim().to_string(), line)).is_some() {
                return Err(Error::Config { line, message: format!("duplicate key '{key}'") });
            }
        }
        Ok(Ini { sections })
    }

    pub fn section(&self, name: &str) -> Option<&IniSection> {
        self.sections.iter().find(|s| s.name == name)
    }

    fn require_section(&self, name: &str) -> Result<&IniSection> {
        self.section(name).ok_or_else(|| Error::Config { line: 0, message: format!("missing section [{name}]") })
    }
}

const PROBLEM_SECTIONS: [&str; 4] = ["domain", "coefficients", "forcing", "bc"];

fn parse_function(section: &IniSection, prefix: &str) -> Result<ScalarFunction1D> {
    let kind_key = format!("{prefix}_kind");
    let params_key = format!("{prefix}_params");
    let kind = section.require(&kind_key)?;
    let params = match section.get(&params_key) {
        Some(p) => parse_number_list(p)
            .map_err(|e| Error::Config { line: section.line_of(&params_key), message: e.to_string() })?,
        None => Vec::new(),
    };
    ScalarFunction1D::from_kind(kind.trim(), &params)
        .map_err(|e| Error::Config { line: section.line_of(&kind_key), message: e.to_string() })
}

fn parse_bc(section: &IniSection, side: &str) -> Result<BoundaryCondition> {
    let v = section.require(side)?.trim();
    let line = section.line_of(side);
    if v == "neumann0" {
        return Ok(BoundaryCondition::NeumannZero);
    }
    match v.strip_prefix("dirichlet:") {
        Some(spec) => ScalarFunction1D::parse(spec)
            .map(BoundaryCondition::Dirichlet)
            .map_err(|e| Error::Config { line, message: e.to_string() }),
        None => Err(Error::Config { line, message: format!("{side}: expected 'dirichlet:<fn>' or 'neumann0', got '{v}'") }),
    }
}

fn is_term_key(key: &str, count: usize) -> bool {
    let Some(rest) = key.strip_prefix("term") else { return false };
    let digits: String = rest.chars().take_while(|c| c.is_ascii_digit()).collect();
    let Ok(i) = digits.parse::<usize>() else { return false };
    if i == 0 || i > count {
        return false;
    }
    matches!(
        &rest[digits.len()..],
        "_fx_kind" | "_fx_params" | "_fy_kind" | "_fy_params" | "_fmu_kind" | "_fmu_params"
    )
}

impl ProblemSpec {
    /// Parses a problem file containing only the problem sections.
    pub fn parse(text: &str) -> Result<ProblemSpec> {
        Self::from_ini(&Ini::parse(text)?, &[])
    }

    /// Builds the problem from the four problem sections; sections named in
    /// `extra_sections` are left for the caller, any other section is an error.
    pub fn from_ini(ini: &Ini, extra_sections: &[&str]) -> Result<ProblemSpec> {
        for s in &ini.sections {
            if !PROBLEM_SECTIONS.contains(&s.name.as_str()) && !extra_sections.contains(&s.name.as_str()) {
                return Err(Error::Config { line: s.line, message: format!("unknown section [{}]", s.name) });
            }
        }
        let dom = ini.require_section("domain")?;
        dom.check_keys(|k| matches!(k, "x0" | "x1" | "y0" | "y1"))?;
        let domain = Rect::new(
            dom.require_number("x0")?,
            dom.require_number("x1")?,
            dom.require_number("y0")?,
            dom.require_number("y1")?,
        );

        let co = ini.require_section("coefficients")?;
        co.check_keys(|k| matches!(k, "mu" | "mu_min" | "mu_max" | "bx" | "by"))?;
        let mu = match (co.number("mu")?, co.number("mu_min")?, co.number("mu_max")?) {
            (Some(m), None, None) => Diffusivity::Constant(m),
            (None, Some(min), Some(max)) => Diffusivity::Interval { min, max },
            _ => {
                return Err(Error::Config {
                    line: co.line,
                    message: "give either 'mu' or both 'mu_min' and 'mu_max'".into(),
                })
            }
        };
        let bx = co.number("bx")?.unwrap_or(0.0);
        let by = co.number("by")?.unwrap_or(0.0);

        let fo = ini.require_section("forcing")?;
        let count = fo.count("term_count")?.unwrap_or(0);
        fo.check_keys(|k| k == "term_count" || is_term_key(k, count))?;
        let mut terms = Vec::with_capacity(count);
        for i in 1..=count {
            let fx = parse_function(fo, &format!("term{i}_fx"))?;
            let fy = parse_function(fo, &format!("term{i}_fy"))?;
            let fmu = if fo.get(&format!("term{i}_fmu_kind")).is_some() {
                Some(parse_function(fo, &format!("term{i}_fmu"))?)
            } else {
                None
            };
            terms.push(SeparableTerm { fx, fy, fmu });
        }

        let bcs = ini.require_section("bc")?;
        bcs.check_keys(|k| matches!(k, "left" | "right" | "top" | "bottom"))?;
        let bc = BoundarySpec {
            left: parse_bc(bcs, "left")?,
            right: parse_bc(bcs, "right")?,
            bottom: parse_bc(bcs, "bottom")?,
            top: parse_bc(bcs, "top")?,
        };

        Ok(ProblemSpec { domain, mu, bx, by, f: SeparableSum::new(terms), bc })
    }

    /// Renders the problem sections; `parse(render(p)) == p`.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let d = &self.domain;
        let _ = writeln!(s, "[domain]\nx0 = {:?}\nx1 = {:?}\ny0 = {:?}\ny1 = {:?}\n", d.x0, d.x1, d.y0, d.y1);
        let _ = writeln!(s, "[coefficients]");
        match self.mu {
            Diffusivity::Constant(m) => {
                let _ = writeln!(s, "mu = {m:?}");
            }
            Diffusivity::Interval { min, max } => {
                let _ = writeln!(s, "mu_min = {min:?}\nmu_max = {max:?}");
            }
        }
        let _ = writeln!(s, "bx = {:?}\nby = {:?}\n", self.bx, self.by);
        let _ = writeln!(s, "[forcing]\nterm_count = {}", self.f.terms.len());
        let render_fn = |s: &mut String, key: String, f: &ScalarFunction1D| {
            let params: Vec<String> = f.params().iter().map(|v| format!("{v:?}")).collect();
            let _ = writeln!(s, "{key}_kind = {}\n{key}_params = {}", f.kind(), params.join(", "));
        };
        for (i, t) in self.f.terms.iter().enumerate() {
            render_fn(&mut s, format!("term{}_fx", i + 1), &t.fx);
            render_fn(&mut s, format!("term{}_fy", i + 1), &t.fy);
            if let Some(fmu) = &t.fmu {
                render_fn(&mut s, format!("term{}_fmu", i + 1), fmu);
            }
        }
        let _ = writeln!(s, "\n[bc]");
        for (name, c) in self.bc.sides() {
            match c {
                BoundaryCondition::NeumannZero => {
                    let _ = writeln!(s, "{name} = neumann0");
                }
                BoundaryCondition::Dirichlet(g) => {
                    let _ = writeln!(s, "{name} = dirichlet:{g}");
                }
            }
        }
        s
    }
}
