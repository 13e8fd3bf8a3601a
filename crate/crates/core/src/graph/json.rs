//! JSON form of an event log: `{config, deaths: {site: [times]},
//! arrows: {"x>y": [times]}}`, times as 17-significant-digit strings.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::config::SimConfig;
use super::log::EventLog;
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
struct LogJson {
    config: SimConfig,
    deaths: BTreeMap<String, Vec<String>>,
    arrows: BTreeMap<String, Vec<String>>,
}

fn fmt_time(t: f64) -> String {
    format!("{t:.16e}")
}

fn parse_time(s: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| Error::MalformedLog(format!("bad time {s:?}")))
}

impl EventLog {
    pub fn to_json(&self) -> Result<String> {
        let cfg = *self.config();
        let m = self.range();
        let mut deaths = BTreeMap::new();
        let mut arrows = BTreeMap::new();
        for x in cfg.x_min..=cfg.x_max {
            let d: Vec<String> = self.deaths(x).map(fmt_time).collect();
            if !d.is_empty() {
                deaths.insert(x.to_string(), d);
            }
            for y in x - m..=x + m {
                if y == x || !cfg.contains(y) {
                    continue;
                }
                let a: Vec<String> = self.arrows(x, y).map(fmt_time).collect();
                if !a.is_empty() {
                    arrows.insert(format!("{x}>{y}"), a);
                }
            }
        }
        Ok(serde_json::to_string(&LogJson { config: cfg, deaths, arrows })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: LogJson = serde_json::from_str(text)?;
        let mut deaths = Vec::new();
        for (site, times) in &raw.deaths {
            let x: i64 = site
                .parse()
                .map_err(|_| Error::MalformedLog(format!("bad site {site:?}")))?;
            for t in times {
                deaths.push((x, parse_time(t)?));
            }
        }
        let mut arrows = Vec::new();
        for (edge, times) in &raw.arrows {
            let (x, y) = edge
                .split_once('>')
                .and_then(|(a, b)| Some((a.parse::<i64>().ok()?, b.parse::<i64>().ok()?)))
                .ok_or_else(|| Error::MalformedLog(format!("bad edge {edge:?}")))?;
            for t in times {
                arrows.push((x, y, parse_time(t)?));
            }
        }
        EventLog::from_events(raw.config, &deaths, &arrows)
    }
}
