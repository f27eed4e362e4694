//! State dumps: parameters, cutoff, amplitudes and photon-number
//! distribution, as JSON or CSV, with readers for both.

use std::io::{BufRead, BufReader, Read, Write};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::FockVector;
use crate::states::{build_state_with, BuildOptions, Engineering, Family, StateSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DumpFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateDump {
    pub label: String,
    pub spec: StateSpec,
    pub cutoff: usize,
    pub tail_bound: f64,
    /// `[re, im]` per Fock level.
    pub amplitudes: Vec<[f64; 2]>,
    pub probabilities: Vec<f64>,
}

impl StateDump {
    pub fn new(spec: &StateSpec, v: &FockVector) -> Self {
        StateDump {
            label: spec.label(),
            spec: *spec,
            cutoff: v.cutoff(),
            tail_bound: v.tail_bound(),
            amplitudes: v.amplitudes().iter().map(|c| [c.re, c.im]).collect(),
            probabilities: v.probabilities(),
        }
    }

    pub fn build(spec: &StateSpec, tail_tol: f64) -> Result<Self> {
        let v = build_state_with(spec, &BuildOptions::default().with_tail_tol(tail_tol))?;
        Ok(StateDump::new(spec, &v))
    }

    /// The dumped amplitudes as a vector, without renormalizing.
    pub fn to_fock_vector(&self) -> FockVector {
        let amps = self.amplitudes.iter().map(|&[re, im]| C64::new(re, im)).collect();
        FockVector::from_amplitudes(amps, self.tail_bound)
    }

    pub fn write<W: Write>(&self, mut w: W, format: DumpFormat) -> Result<()> {
        match format {
            DumpFormat::Json => {
                serde_json::to_writer_pretty(&mut w, self)?;
                writeln!(w)?;
            }
            DumpFormat::Csv => {
                let s = &self.spec;
                writeln!(w, "# label={}", self.label)?;
                writeln!(w, "# family={}", family_name(s.family))?;
                writeln!(w, "# engineering={}", engineering_name(s.engineering))?;
                for (k, v) in [
                    ("alpha_mag", s.alpha_mag),
                    ("theta", s.theta),
                    ("p", s.p),
                    ("chi", s.chi),
                ] {
                    writeln!(w, "# {k}={v:e}")?;
                }
                writeln!(w, "# m={}", s.m)?;
                writeln!(w, "# cutoff={}", self.cutoff)?;
                writeln!(w, "# tail_bound={:e}", self.tail_bound)?;
                let mut out = csv::Writer::from_writer(w);
                out.write_record(["n", "amplitude_re", "amplitude_im", "p_n"])?;
                for (n, (a, p)) in self.amplitudes.iter().zip(&self.probabilities).enumerate() {
                    out.write_record([
                        n.to_string(),
                        format!("{:e}", a[0]),
                        format!("{:e}", a[1]),
                        format!("{p:e}"),
                    ])?;
                }
                out.flush()?;
            }
        }
        Ok(())
    }

    pub fn read<R: Read>(r: R, format: DumpFormat) -> Result<Self> {
        match format {
            DumpFormat::Json => Ok(serde_json::from_reader(r)?),
            DumpFormat::Csv => read_csv(r),
        }
    }
}

fn family_name(f: Family) -> &'static str {
    match f {
        Family::Ecs => "ecs",
        Family::Bs => "bs",
        Family::Ks => "ks",
    }
}

fn engineering_name(e: Engineering) -> &'static str {
    match e {
        Engineering::None => "none",
        Engineering::VacuumFiltered => "vf",
        Engineering::PhotonAdded => "pa",
    }
}

fn malformed(msg: impl Into<String>) -> Error {
    Error::MalformedDump(msg.into())
}

fn read_csv<R: Read>(r: R) -> Result<StateDump> {
    let mut reader = BufReader::new(r);
    let mut meta = std::collections::BTreeMap::new();
    let mut body = String::new();
    let mut line = String::new();
    while reader.read_line(&mut line)? > 0 {
        match line.strip_prefix('#') {
            Some(rest) => {
                let (k, v) = rest
                    .trim()
                    .split_once('=')
                    .ok_or_else(|| malformed(format!("bad metadata line `{}`", line.trim())))?;
                meta.insert(k.trim().to_string(), v.trim().to_string());
            }
            None => body.push_str(&line),
        }
        line.clear();
    }
    let get = |k: &str| meta.get(k).ok_or_else(|| malformed(format!("missing `{k}`")));
    let num = |k: &str| -> Result<f64> { get(k)?.parse().map_err(|_| malformed(format!("bad `{k}`"))) };
    let family = match get("family")?.as_str() {
        "ecs" => Family::Ecs,
        "bs" => Family::Bs,
        "ks" => Family::Ks,
        other => return Err(malformed(format!("unknown family `{other}`"))),
    };
    let engineering = match get("engineering")?.as_str() {
        "none" => Engineering::None,
        "vf" => Engineering::VacuumFiltered,
        "pa" => Engineering::PhotonAdded,
        other => return Err(malformed(format!("unknown engineering `{other}`"))),
    };
    let spec = StateSpec {
        family,
        engineering,
        alpha_mag: num("alpha_mag")?,
        theta: num("theta")?,
        p: num("p")?,
        m: get("m")?.parse().map_err(|_| malformed("bad `m`"))?,
        chi: num("chi")?,
    };
    let cutoff: usize = get("cutoff")?.parse().map_err(|_| malformed("bad `cutoff`"))?;

    let mut amplitudes = Vec::new();
    let mut probabilities = Vec::new();
    for (i, record) in csv::Reader::from_reader(body.as_bytes()).records().enumerate() {
        let record = record?;
        let field = |j: usize| -> Result<f64> {
            record
                .get(j)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| malformed(format!("bad row {i}")))
        };
        if field(0)? as usize != i {
            return Err(malformed(format!("row {i} is out of order")));
        }
        amplitudes.push([field(1)?, field(2)?]);
        probabilities.push(field(3)?);
    }
    if amplitudes.len() != cutoff + 1 {
        return Err(malformed(format!(
            "expected {} rows, found {}",
            cutoff + 1,
            amplitudes.len()
        )));
    }
    Ok(StateDump {
        label: get("label")?.clone(),
        spec,
        cutoff,
        tail_bound: num("tail_bound")?,
        amplitudes,
        probabilities,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::DEFAULT_TAIL_TOL;

    fn round_trip(d: &StateDump, format: DumpFormat) -> StateDump {
        let mut buf = Vec::new();
        d.write(&mut buf, format).unwrap();
        StateDump::read(buf.as_slice(), format).unwrap()
    }

    #[test]
    fn even_coherent_has_even_support() {
        let d = StateDump::build(&StateSpec::ecs(1.0), DEFAULT_TAIL_TOL).unwrap();
        for (n, p) in d.probabilities.iter().enumerate() {
            if n % 2 == 1 {
                assert_eq!(*p, 0.0);
            }
        }
        assert!(d.probabilities[2] > 0.0);
    }

    #[test]
    fn photon_added_binomial_support() {
        let d = StateDump::build(&StateSpec::bs(0.3, 10).photon_added(), DEFAULT_TAIL_TOL).unwrap();
        assert_eq!(d.probabilities[0], 0.0);
        assert_eq!(d.cutoff, 11);
        assert!(d.probabilities[1..=11].iter().all(|&p| p > 0.0));
    }

    #[test]
    fn both_formats_round_trip() {
        let spec = StateSpec::ks(1.3, 0.07).with_theta(0.4).vacuum_filtered();
        let d = StateDump::build(&spec, DEFAULT_TAIL_TOL).unwrap();
        for format in [DumpFormat::Json, DumpFormat::Csv] {
            let back = round_trip(&d, format);
            assert_eq!(back, d);
            assert!((back.to_fock_vector().norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn truncated_csv_is_rejected() {
        let d = StateDump::build(&StateSpec::bs(0.3, 4), DEFAULT_TAIL_TOL).unwrap();
        let mut buf = Vec::new();
        d.write(&mut buf, DumpFormat::Csv).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let cut: String = text
            .lines()
            .take(text.lines().count() - 1)
            .map(|l| format!("{l}\n"))
            .collect();
        assert!(matches!(
            StateDump::read(cut.as_bytes(), DumpFormat::Csv),
            Err(Error::MalformedDump(_))
        ));
    }
}
