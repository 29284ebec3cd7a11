//! The CSV profile table.

use std::path::Path;

use crate::{fmt_f64, CliError};

pub const COLUMNS: [&str; 11] = [
    "t", "A1", "A2", "A3", "B1", "B2", "B3", "D1", "D2", "D3", "res_dpsi",
];

pub type Row = [f64; 11];

#[derive(Debug, Clone, PartialEq)]
pub struct TableMeta {
    pub tool_version: String,
    pub config_hash: String,
    /// Canonical config JSON; enough to rebuild the run.
    pub config: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileTable {
    pub meta: TableMeta,
    pub rows: Vec<Row>,
}

impl ProfileTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = COLUMNS.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# g2c {}\n# config_sha256 {}\n# config {}\n",
            self.meta.tool_version, self.meta.config_hash, self.meta.config
        );
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(COLUMNS).expect("write to memory");
        for r in &self.rows {
            w.write_record(r.iter().map(|x| fmt_f64(*x))).expect("write to memory");
        }
        out.push_str(std::str::from_utf8(&w.into_inner().expect("flush to memory")).expect("ascii"));
        out
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut tool_version = None;
        let mut config_hash = None;
        let mut config = None;
        let mut body = 0;
        for line in text.split_inclusive('\n') {
            let Some(meta) = line.strip_prefix("# ") else {
                break;
            };
            body += line.len();
            let (key, value) = meta.trim_end_matches(['\n', '\r']).split_once(' ').unwrap_or((meta, ""));
            match key {
                "g2c" => tool_version = Some(value.to_string()),
                "config_sha256" => config_hash = Some(value.to_string()),
                "config" => config = Some(value.to_string()),
                _ => {}
            }
        }
        let meta = TableMeta {
            tool_version: tool_version.ok_or("missing '# g2c' header line")?,
            config_hash: config_hash.ok_or("missing '# config_sha256' header line")?,
            config: config.ok_or("missing '# config' header line")?,
        };

        let mut rdr = csv::Reader::from_reader(text[body..].as_bytes());
        let header = rdr.headers().map_err(|e| e.to_string())?;
        if header.iter().ne(COLUMNS) {
            return Err(format!("expected columns {}, got {}", COLUMNS.join(","), header.iter().collect::<Vec<_>>().join(",")));
        }
        let mut rows: Vec<Row> = Vec::new();
        for (n, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| e.to_string())?;
            let mut row = [0.0; 11];
            for (k, field) in rec.iter().enumerate() {
                row[k] = field
                    .parse()
                    .map_err(|_| format!("row {}: column {} is not a number: {field:?}", n + 1, COLUMNS[k]))?;
            }
            if let Some(prev) = rows.last() {
                if !(row[0] > prev[0]) {
                    return Err(format!("row {}: t is not strictly ascending", n + 1));
                }
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err("no data rows".into());
        }
        Ok(ProfileTable { meta, rows })
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|msg| CliError::Table {
            path: path.to_path_buf(),
            msg,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ProfileTable {
        ProfileTable {
            meta: TableMeta {
                tool_version: "0.1.0".into(),
                config_hash: "ab".repeat(32),
                config: r#"{"profile":{"kind":"cone"},"b0":1.0}"#.into(),
            },
            rows: vec![
                [0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, f64::NAN],
                [0.1, 0.05, 0.05, 0.05, 1.0 / 3.0, 1e-300, 2.5e17, 0.1, 0.2, 0.3, 1.5e-12],
            ],
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let t = sample();
        let csv = t.to_csv();
        let back = ProfileTable::parse(&csv).unwrap();
        assert_eq!(back.meta, t.meta);
        for (a, b) in back.rows.iter().zip(&t.rows) {
            for k in 0..11 {
                assert_eq!(a[k].to_bits(), b[k].to_bits());
            }
        }
        assert_eq!(back.to_csv(), csv);
        assert!(csv.lines().nth(3).unwrap() == COLUMNS.join(","));
    }

    #[test]
    fn rejects_bad_tables() {
        let csv = sample().to_csv();
        assert!(ProfileTable::parse(&csv.replace("res_dpsi", "res")).is_err());
        assert!(ProfileTable::parse(&csv.replace("0.1,0.05", "0.0,0.05")).is_err());
        assert!(ProfileTable::parse(&csv.replace("# config_sha256", "# hash")).is_err());
        assert!(ProfileTable::parse(&csv.replace("0.05,0.05,0.05", "0.05,x,0.05")).is_err());
    }
}
