//! CSV and JSON artifacts, and the provenance every output directory carries.
//!
//! Floats are written as `{:.16e}` (17 significant digits), which reads back
//! to the same bits. Missing values are empty cells.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thinflow_core::lagrangian::OriginSample;
use thinflow_core::solver::Diagnostics;

use crate::error::{Result, ThinflowError};
use crate::experiments::{DissipationRecord, PairingOutcome, ScalingFit};
use crate::probe::KeyRow;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn cell(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// Write a numeric table.
pub fn write_table(path: &Path, header: &[String], rows: &[Vec<Option<f64>>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        w.write_record(row.iter().map(|v| cell(*v)))?;
    }
    w.flush()?;
    Ok(())
}

/// Header and rows of a numeric table.
pub fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<Option<f64>>>)> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|c| {
                if c.is_empty() {
                    Ok(None)
                } else {
                    c.parse::<f64>().map(Some).map_err(|_| ThinflowError::Usage(format!("{}: bad number {c:?}", path.display())))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}

fn names(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|s| s.to_string()).collect()
}

pub const DIAGNOSTICS_COLUMNS: [&str; 6] = ["t", "energy", "enstrophy", "palinstrophy", "max_omega", "tail_fraction"];

pub fn write_diagnostics(path: &Path, rows: &[Diagnostics]) -> Result<()> {
    let data: Vec<_> = rows
        .iter()
        .map(|d| [d.t, d.energy, d.enstrophy, d.palinstrophy, d.max_omega, d.tail_fraction].map(Some).to_vec())
        .collect();
    write_table(path, &names(&DIAGNOSTICS_COLUMNS), &data)
}

pub fn read_diagnostics(path: &Path) -> Result<Vec<Diagnostics>> {
    let (header, rows) = read_table(path)?;
    expect_header(path, &header, &names(&DIAGNOSTICS_COLUMNS))?;
    rows.iter()
        .map(|r| {
            let v = full(path, r)?;
            Ok(Diagnostics {
                t: v[0],
                energy: v[1],
                enstrophy: v[2],
                palinstrophy: v[3],
                max_omega: v[4],
                tail_fraction: v[5],
            })
        })
        .collect()
}

pub const ORIGIN_COLUMNS: [&str; 10] = ["t", "du11", "du22", "du12", "du21", "deta11", "deta22", "deta12", "deta21", "det"];

pub fn write_origin(path: &Path, rows: &[OriginSample]) -> Result<()> {
    let data: Vec<_> = rows
        .iter()
        .map(|o| {
            let (g, d) = (o.grad, o.deformation);
            [o.t, g[0][0], g[1][1], g[0][1], g[1][0], d[0][0], d[1][1], d[0][1], d[1][0], o.det()]
                .map(Some)
                .to_vec()
        })
        .collect();
    write_table(path, &names(&ORIGIN_COLUMNS), &data)
}

/// Key-integral table: `t, r, I, I_k…, supB_ratio`.
pub fn write_key_integral(path: &Path, labels: &[String], rows: &[KeyRow]) -> Result<()> {
    let mut header = names(&["t", "r", "I"]);
    header.extend(labels.iter().cloned());
    header.push("supB_ratio".into());
    let data: Vec<_> = rows
        .iter()
        .map(|k| {
            let mut row = vec![Some(k.t), Some(k.r), Some(k.total)];
            row.extend(labels.iter().map(|l| k.parts.iter().find(|p| &p.0 == l).map(|p| p.1)));
            row.push(k.sup_b_ratio);
            row
        })
        .collect();
    write_table(path, &header, &data)
}

pub const RECORD_COLUMNS: [&str; 13] = [
    "n",
    "nu",
    "t_end",
    "grid",
    "chi",
    "mean_palinstrophy_sq",
    "enstrophy_initial",
    "enstrophy_final",
    "budget_residual",
    "resolved_until",
    "velocity_gap",
    "vorticity_gap",
    "gradient_gap",
];

/// One row per record with its terminal gaps.
pub fn write_records(path: &Path, records: &[DissipationRecord]) -> Result<()> {
    let data: Vec<_> = records
        .iter()
        .map(|r| {
            let g = r.samples.last();
            vec![
                Some(r.n as f64),
                Some(r.nu),
                Some(r.t_end),
                Some(r.grid as f64),
                Some(r.chi),
                Some(r.mean_palinstrophy_sq),
                Some(r.enstrophy_initial),
                Some(r.enstrophy_final),
                Some(r.budget_residual),
                r.resolved_until,
                g.map(|g| g.velocity_gap),
                g.map(|g| g.vorticity_gap),
                g.map(|g| g.gradient_gap),
            ]
        })
        .collect();
    write_table(path, &names(&RECORD_COLUMNS), &data)
}

pub const SAMPLE_COLUMNS: [&str; 6] = ["t", "velocity_gap", "vorticity_gap", "gradient_gap", "enstrophy", "palinstrophy"];

/// The time series of one paired run.
pub fn write_pair_samples(path: &Path, record: &DissipationRecord) -> Result<()> {
    let data: Vec<_> = record
        .samples
        .iter()
        .map(|s| [s.t, s.velocity_gap, s.vorticity_gap, s.gradient_gap, s.enstrophy, s.palinstrophy].map(Some).to_vec())
        .collect();
    write_table(path, &names(&SAMPLE_COLUMNS), &data)
}

fn expect_header(path: &Path, found: &[String], want: &[String]) -> Result<()> {
    if found != want {
        return Err(ThinflowError::Usage(format!("{}: unexpected columns {}", path.display(), found.join(","))));
    }
    Ok(())
}

fn full(path: &Path, row: &[Option<f64>]) -> Result<Vec<f64>> {
    row.iter()
        .map(|v| v.ok_or_else(|| ThinflowError::Usage(format!("{}: missing value", path.display()))))
        .collect()
}

/// `summary.json` of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub version: String,
    pub records: Vec<DissipationRecord>,
    pub scaling_fit: Option<ScalingFit>,
    pub pairing: Vec<PairingTrace>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairingTrace {
    pub n: u32,
    pub nu: f64,
    /// `(ν, terminal H¹ gap)` per attempt.
    pub evaluations: Vec<(f64, f64)>,
}

impl Summary {
    pub fn new(outcomes: &[PairingOutcome], fit: Option<ScalingFit>) -> Self {
        Summary {
            version: VERSION.to_string(),
            records: outcomes.iter().map(|o| o.record.clone()).collect(),
            scaling_fit: fit,
            pairing: outcomes
                .iter()
                .map(|o| PairingTrace { n: o.n, nu: o.nu, evaluations: o.evaluations.clone() })
                .collect(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut f = fs::File::create(path)?;
        serde_json::to_writer_pretty(&mut f, self)?;
        f.write_all(b"\n")?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_slice(&fs::read(path)?)?)
    }
}

/// Git-style object hash (`sha256("blob <len>\0" + bytes)`), hex encoded.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes `config.resolved` and `manifest.txt` (tool version plus the hash
/// of every binary input) into `dir`.
pub fn write_provenance(dir: &Path, resolved: &str, inputs: &[PathBuf]) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.resolved"), resolved)?;
    let mut manifest = format!("thinflow {VERSION}\nconfig.resolved {}\n", content_hash(resolved.as_bytes()));
    for p in inputs {
        manifest.push_str(&format!("input {} {}\n", p.display(), content_hash(&fs::read(p)?)));
    }
    fs::write(dir.join("manifest.txt"), manifest)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::PairSample;

    fn tmp(name: &str) -> PathBuf {
        let d = std::env::temp_dir().join(format!("thinflow-output-{}-{name}", std::process::id()));
        fs::create_dir_all(&d).unwrap();
        d
    }

    fn record() -> DissipationRecord {
        DissipationRecord {
            n: 3,
            nu: 1.0 / 3.0 * 1e-4,
            t_end: 1.0,
            grid: 256,
            chi: 0.1 + 0.2,
            mean_palinstrophy_sq: std::f64::consts::PI * 1e5,
            enstrophy_initial: 2.0f64.sqrt(),
            enstrophy_final: 1.0 - 1e-17,
            budget_residual: 3.3e-9,
            resolved_until: None,
            samples: vec![PairSample {
                t: 1.0,
                velocity_gap: 1e-300,
                vorticity_gap: 5e-324,
                gradient_gap: 0.4999999999999999,
                enstrophy: 1.0,
                palinstrophy: 7.0,
            }],
        }
    }

    #[test]
    fn empty_input_writes_a_header_only_csv() {
        let p = tmp("empty").join("records.csv");
        write_records(&p, &[]).unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), RECORD_COLUMNS.join(",") + "\n");
        let (_, rows) = read_table(&p).unwrap();
        assert!(rows.is_empty());
    }

    #[test]
    fn one_record_is_one_row_and_reads_back_bitwise() {
        let p = tmp("one").join("records.csv");
        let r = record();
        write_records(&p, &[r.clone()]).unwrap();
        let (header, rows) = read_table(&p).unwrap();
        assert_eq!(header, names(&RECORD_COLUMNS));
        assert_eq!(rows.len(), 1);
        let row = &rows[0];
        assert_eq!(row[1].unwrap().to_bits(), r.nu.to_bits());
        assert_eq!(row[4].unwrap().to_bits(), r.chi.to_bits());
        assert_eq!(row[7].unwrap().to_bits(), r.enstrophy_final.to_bits());
        assert_eq!(row[9], None);
        assert_eq!(row[11].unwrap().to_bits(), 5e-324f64.to_bits());
        assert_eq!(row[12].unwrap().to_bits(), r.samples[0].gradient_gap.to_bits());
    }

    #[test]
    fn diagnostics_round_trip() {
        let p = tmp("diag").join("diagnostics.csv");
        let d: Vec<_> = (0..5)
            .map(|i| Diagnostics {
                t: i as f64 * 0.1,
                energy: 1.0 / (i as f64 + 3.0),
                enstrophy: (i as f64).exp(),
                palinstrophy: -0.0,
                max_omega: f64::MAX,
                tail_fraction: 1e-17 * i as f64,
            })
            .collect();
        write_diagnostics(&p, &d).unwrap();
        let back = read_diagnostics(&p).unwrap();
        for (a, b) in d.iter().zip(&back) {
            assert_eq!(format!("{a:?}"), format!("{b:?}"));
            assert_eq!(a.energy.to_bits(), b.energy.to_bits());
        }
    }

    #[test]
    fn summary_round_trips() {
        let p = tmp("json").join("summary.json");
        let s = Summary { version: VERSION.into(), records: vec![record()], scaling_fit: None, pairing: vec![] };
        s.write(&p).unwrap();
        assert_eq!(Summary::read(&p).unwrap(), s);
    }

    #[test]
    fn content_hash_matches_git_blob_format() {
        // sha256 of b"blob 5\0hello", computed independently
        assert_eq!(content_hash(b"hello"), "8aec4e4876f854f688d0ebfc8f37598f38e5fd6903cccc850ca36591175aeb60");
    }
}
