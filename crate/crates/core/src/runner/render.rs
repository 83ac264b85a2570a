use std::fmt::Write;

use crate::covering::LemmaReport;
use crate::maximal::WeakReport;
use crate::point::Point;
use crate::quasimetric::DoublingEntry;
use crate::sections::GrowthReport;

use super::RunReport;

fn coords(p: &Point) -> String {
    p.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ")
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn growth_csv(rep: &GrowthReport) -> String {
    let mut s = String::from("center,height,volume,stderr,ratio,degenerate\n");
    for e in &rep.entries {
        writeln!(s, "{},{},{},{},{},{}", coords(&e.center), e.height, e.volume, e.stderr, e.ratio, e.degenerate).unwrap();
    }
    s
}

/// One row per family and `ε`, then the mean profile as family `mean`.
pub fn overlap_csv(rep: &LemmaReport) -> String {
    let mut s = String::from("family,eps,count\n");
    for (k, f) in rep.families.iter().enumerate() {
        for (e, c) in &f.profile {
            writeln!(s, "{k},{e},{c}").unwrap();
        }
    }
    for (e, c) in &rep.mean_profile {
        writeln!(s, "mean,{e},{c}").unwrap();
    }
    s
}

pub fn superlevel_csv(weak: &[WeakReport]) -> String {
    let mut s = String::from("function,beta,measure\n");
    for w in weak {
        for (b, m) in &w.superlevel {
            writeln!(s, "\"{}\",{b},{m}", w.function.replace('"', "'")).unwrap();
        }
    }
    s
}

pub fn doubling_csv(entries: &[DoublingEntry]) -> String {
    let mut s = String::from("center,height,stratum,section_ratio,ball_ratio\n");
    for e in entries {
        let stratum = serde_json::to_value(e.stratum).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
        writeln!(s, "{},{},{stratum},{},{}", coords(&e.center), e.height, opt(e.section_ratio), opt(e.ball_ratio)).unwrap();
    }
    s
}

pub fn markdown(rep: &RunReport) -> String {
    let mut s = String::new();
    writeln!(s, "# masec run: {}\n", rep.instance).unwrap();
    writeln!(s, "seed {}, overall **{}**\n", rep.config.seed, if rep.passed { "PASS" } else { "FAIL" }).unwrap();
    writeln!(s, "| check | result | constants |").unwrap();
    writeln!(s, "|---|---|---|").unwrap();
    for c in &rep.checks {
        let consts = c.constants.iter().map(|(k, v)| format!("{k} = {v:.6}")).collect::<Vec<_>>().join(", ");
        writeln!(s, "| {} | {} | {} |", c.name, if c.passed { "pass" } else { "FAIL" }, consts).unwrap();
    }
    for c in &rep.checks {
        writeln!(s, "\n## {}\n\n{}\n", c.name, c.citation).unwrap();
        for a in &c.hard {
            writeln!(s, "- [{}] {}: {}", if a.passed { "pass" } else { "FAIL" }, a.name, a.detail).unwrap();
        }
        for a in &c.soft {
            writeln!(s, "- ({}) {}: {}", if a.passed { "ok" } else { "note" }, a.name, a.detail).unwrap();
        }
    }
    s
}
