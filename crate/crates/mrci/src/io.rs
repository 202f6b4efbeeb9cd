//! Dataset ingestion and emission: a generic per-row CSV schema and an
//! adapter for CPC18-style competition tables.
//!
//! Generic schema columns: `subject,trial,choice,a_prizes,a_probs,b_prizes,
//! b_probs[,state_probs,a_state_payoffs,b_state_payoffs]`. List cells use ';'
//! as the inner delimiter. Exactly one of the marginal group (`a_*`/`b_*`) or
//! the joint group (`state_*`) must be populated per row; the joint form
//! pins the exact payoff correlation used by context-dependent rules.

use crate::admissibility::{Dataset, Observation};
use crate::error::{Error, Result};
use crate::lottery::{ActTable, Lottery, Menu};
use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

const MARGINAL_COLS: [&str; 4] = ["a_prizes", "a_probs", "b_prizes", "b_probs"];
const JOINT_COLS: [&str; 3] = ["state_probs", "a_state_payoffs", "b_state_payoffs"];

fn parse_list(cell: &str, line: usize, col: &str) -> Result<Vec<f64>> {
    cell.split(';')
        .map(|s| {
            s.trim().parse::<f64>().map_err(|_| Error::MalformedRecord {
                line,
                msg: format!("cannot parse '{s}' in column {col}"),
            })
        })
        .collect()
}

fn header_map(headers: &csv::StringRecord) -> HashMap<String, usize> {
    headers
        .iter()
        .enumerate()
        .map(|(i, h)| (h.trim().to_string(), i))
        .collect()
}

/// Parse the generic schema into one dataset per subject, subjects ordered by
/// first appearance. Unknown columns are ignored with a warning on stderr.
pub fn parse_generic_csv(path: &Path) -> Result<Vec<Dataset>> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = header_map(reader.headers()?);
    let required = ["subject", "trial", "choice"];
    let known: Vec<&str> = required
        .iter()
        .chain(MARGINAL_COLS.iter())
        .chain(JOINT_COLS.iter())
        .copied()
        .collect();
    let missing: Vec<&str> = required
        .iter()
        .chain(MARGINAL_COLS.iter())
        .copied()
        .filter(|c| !headers.contains_key(*c))
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingColumns(missing.join(", ")));
    }
    for col in headers.keys() {
        if !known.contains(&col.as_str()) {
            eprintln!("warning: ignoring unknown column '{col}'");
        }
    }

    let get = |rec: &csv::StringRecord, col: &str| -> String {
        headers
            .get(col)
            .and_then(|&i| rec.get(i))
            .unwrap_or("")
            .trim()
            .to_string()
    };

    let mut order: Vec<String> = Vec::new();
    let mut groups: HashMap<String, Vec<Observation>> = HashMap::new();
    for record in reader.records() {
        let record = record?;
        let line = record
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or(0);
        let subject = get(&record, "subject");
        if subject.is_empty() {
            return Err(Error::MalformedRecord { line, msg: "empty subject".into() });
        }
        let trial: usize = get(&record, "trial").parse().map_err(|_| Error::MalformedRecord {
            line,
            msg: "trial must be a non-negative integer".into(),
        })?;
        let choice: u8 = match get(&record, "choice").as_str() {
            "0" => 0,
            "1" => 1,
            other => {
                return Err(Error::MalformedRecord {
                    line,
                    msg: format!("choice must be 0 or 1, got '{other}'"),
                })
            }
        };

        let joint_cells: Vec<String> = JOINT_COLS.iter().map(|c| get(&record, c)).collect();
        let marginal_cells: Vec<String> = MARGINAL_COLS.iter().map(|c| get(&record, c)).collect();
        let any_joint = joint_cells.iter().any(|c| !c.is_empty());
        let any_marginal = marginal_cells.iter().any(|c| !c.is_empty());

        let menu = if any_joint {
            if any_marginal {
                return Err(Error::MalformedRecord {
                    line,
                    msg: "row mixes marginal-form and joint-form columns".into(),
                });
            }
            if joint_cells.iter().any(|c| c.is_empty()) {
                return Err(Error::MalformedRecord {
                    line,
                    msg: "joint form needs all of state_probs, a_state_payoffs, b_state_payoffs"
                        .into(),
                });
            }
            let probs = parse_list(&joint_cells[0], line, JOINT_COLS[0])?;
            let pa = parse_list(&joint_cells[1], line, JOINT_COLS[1])?;
            let pb = parse_list(&joint_cells[2], line, JOINT_COLS[2])?;
            let table = ActTable::new(&probs, &pa, &pb).map_err(|e| Error::MalformedRecord {
                line,
                msg: e.to_string(),
            })?;
            Menu::joint(table)
        } else {
            if marginal_cells.iter().any(|c| c.is_empty()) {
                return Err(Error::MalformedRecord {
                    line,
                    msg: "marginal form needs all of a_prizes, a_probs, b_prizes, b_probs".into(),
                });
            }
            let az = parse_list(&marginal_cells[0], line, MARGINAL_COLS[0])?;
            let ap = parse_list(&marginal_cells[1], line, MARGINAL_COLS[1])?;
            let bz = parse_list(&marginal_cells[2], line, MARGINAL_COLS[2])?;
            let bp = parse_list(&marginal_cells[3], line, MARGINAL_COLS[3])?;
            let mk = |z: &[f64], p: &[f64]| {
                Lottery::new(z, p).map_err(|e| Error::MalformedRecord { line, msg: e.to_string() })
            };
            Menu::marginal(mk(&az, &ap)?, mk(&bz, &bp)?)
        };

        if !groups.contains_key(&subject) {
            order.push(subject.clone());
        }
        groups
            .entry(subject)
            .or_default()
            .push(Observation { trial, menu, choice });
    }

    if order.is_empty() {
        return Err(Error::NoRecords);
    }
    Ok(order
        .into_iter()
        .map(|s| {
            let obs = groups.remove(&s).unwrap();
            Dataset::new(s, obs)
        })
        .collect())
}

fn fmt_list(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

/// Emit datasets in the generic schema. Floats use shortest round-trip
/// formatting, so `parse_generic_csv(write_generic_csv(d))` is exact.
pub fn write_generic_csv<W: Write>(datasets: &[Dataset], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "subject",
        "trial",
        "choice",
        "a_prizes",
        "a_probs",
        "b_prizes",
        "b_probs",
        "state_probs",
        "a_state_payoffs",
        "b_state_payoffs",
    ])?;
    for d in datasets {
        for obs in &d.observations {
            let mut row = vec![
                d.subject_id.clone(),
                obs.trial.to_string(),
                obs.choice.to_string(),
            ];
            match &obs.menu.form {
                crate::lottery::MenuForm::Marginal { a, b } => {
                    row.extend([
                        fmt_list(a.prizes()),
                        fmt_list(a.probs()),
                        fmt_list(b.prizes()),
                        fmt_list(b.probs()),
                        String::new(),
                        String::new(),
                        String::new(),
                    ]);
                }
                crate::lottery::MenuForm::Joint(t) => {
                    row.extend([
                        String::new(),
                        String::new(),
                        String::new(),
                        String::new(),
                        fmt_list(t.state_probs()),
                        fmt_list(t.payoffs_a()),
                        fmt_list(t.payoffs_b()),
                    ]);
                }
            }
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn find_col(headers: &HashMap<String, usize>, synonyms: &[&str]) -> Option<usize> {
    let lower: HashMap<String, usize> =
        headers.iter().map(|(k, &v)| (k.to_ascii_lowercase(), v)).collect();
    synonyms
        .iter()
        .find_map(|s| lower.get(&s.to_ascii_lowercase()).copied())
}

fn trivial_lot_shape(cell: &str) -> bool {
    matches!(cell.trim().to_ascii_lowercase().as_str(), "" | "-" | "0" | "none")
}

/// Parse a CPC18-style table of two-outcome risk problems. Ambiguous rows
/// (`Amb = 1`) are dropped; rows with a non-trivial lottery shape are counted
/// and rejected as a whole, since expanding multi-outcome shapes is out of
/// scope. The choice indicator follows the 1 = first-listed convention, so a
/// `B` column (1 = chose option B) maps to `1 - B`.
pub fn parse_cpc18(path: &Path) -> Result<Vec<Dataset>> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = header_map(reader.headers()?);
    let col = |syns: &[&str]| find_col(&headers, syns);

    let subj = col(&["SubjID", "Subj", "subject", "id"]);
    let trial = col(&["Trial", "trial", "Order"]);
    let ha = col(&["Ha"]);
    let pha = col(&["pHa"]);
    let la = col(&["La"]);
    let hb = col(&["Hb"]);
    let phb = col(&["pHb"]);
    let lb = col(&["Lb"]);
    let amb = col(&["Amb", "Ambiguous"]);
    let chose_b = col(&["B", "choice", "Risk"]);
    let shape_a = col(&["LotShapeA", "LotShape"]);
    let shape_b = col(&["LotShapeB"]);
    let num_a = col(&["LotNumA", "LotNum"]);
    let num_b = col(&["LotNumB"]);

    let required: [(&str, Option<usize>); 9] = [
        ("SubjID", subj),
        ("Trial", trial),
        ("Ha", ha),
        ("pHa", pha),
        ("La", la),
        ("Hb", hb),
        ("pHb", phb),
        ("Lb", lb),
        ("B/choice", chose_b),
    ];
    let missing: Vec<&str> = required
        .iter()
        .filter(|(_, c)| c.is_none())
        .map(|&(n, _)| n)
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingColumns(missing.join(", ")));
    }

    let mut order: Vec<String> = Vec::new();
    let mut groups: HashMap<String, Vec<Observation>> = HashMap::new();
    let mut bad_shape = 0usize;
    for record in reader.records() {
        let record = record?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let cell = |i: Option<usize>| i.and_then(|i| record.get(i)).unwrap_or("").trim();
        let num = |i: Option<usize>, name: &str| -> Result<f64> {
            cell(i).parse().map_err(|_| Error::MalformedRecord {
                line,
                msg: format!("cannot parse column {name}: '{}'", cell(i)),
            })
        };

        if let Some(a) = amb {
            if record.get(a).map(str::trim) == Some("1") {
                continue;
            }
        }
        let shape_bad = !trivial_lot_shape(cell(shape_a))
            || !trivial_lot_shape(cell(shape_b))
            || [num_a, num_b].iter().any(|&i| {
                cell(i).parse::<f64>().map(|n| n > 1.0).unwrap_or(false)
            });
        if shape_bad {
            bad_shape += 1;
            continue;
        }

        let pa = num(pha, "pHa")?;
        let pb = num(phb, "pHb")?;
        let a = Lottery::new(&[num(ha, "Ha")?, num(la, "La")?], &[pa, 1.0 - pa])
            .map_err(|e| Error::MalformedRecord { line, msg: e.to_string() })?;
        let b = Lottery::new(&[num(hb, "Hb")?, num(lb, "Lb")?], &[pb, 1.0 - pb])
            .map_err(|e| Error::MalformedRecord { line, msg: e.to_string() })?;
        let chose_second: f64 = num(chose_b, "B/choice")?;
        let choice = if chose_second == 0.0 { 1 } else { 0 };
        let t: usize = cell(trial).parse().map_err(|_| Error::MalformedRecord {
            line,
            msg: format!("cannot parse Trial: '{}'", cell(trial)),
        })?;

        let subject = cell(subj).to_string();
        if !groups.contains_key(&subject) {
            order.push(subject.clone());
        }
        groups
            .entry(subject)
            .or_default()
            .push(Observation { trial: t, menu: Menu::marginal(a, b), choice });
    }

    if bad_shape > 0 {
        return Err(Error::UnsupportedLotShape { count: bad_shape });
    }
    if order.is_empty() {
        return Err(Error::NoRecords);
    }
    Ok(order
        .into_iter()
        .map(|s| {
            let obs = groups.remove(&s).unwrap();
            Dataset::new(s, obs)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        std::io::Write::write_all(&mut f, content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn parses_marginal_and_joint_rows() {
        let csv = "subject,trial,choice,a_prizes,a_probs,b_prizes,b_probs,state_probs,a_state_payoffs,b_state_payoffs\n\
            s1,1,1,,,,,0.3333333333333333;0.3333333333333333;0.3333333333333334,20;0;10,0;11;20\n\
            s1,2,1,3000;0,0.9;0.1,6000;0,0.45;0.55,,,\n";
        let f = write_temp(csv);
        let ds = parse_generic_csv(f.path()).unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(ds[0].len(), 2);
        assert!(ds[0].observations[0].menu.is_joint());
        assert!(!ds[0].observations[1].menu.is_joint());
        assert_eq!(ds[0].observations[0].choice, 1);
        let (a, _) = ds[0].observations[1].menu.lotteries();
        assert_eq!(a.prizes(), &[0.0, 3000.0]);
    }

    #[test]
    fn empty_file_is_an_error() {
        let f = write_temp(
            "subject,trial,choice,a_prizes,a_probs,b_prizes,b_probs\n",
        );
        assert!(matches!(parse_generic_csv(f.path()), Err(Error::NoRecords)));
    }

    #[test]
    fn malformed_rows_report_line_numbers() {
        let csv = "subject,trial,choice,a_prizes,a_probs,b_prizes,b_probs\n\
            s1,1,1,10;0,0.5;0.5,5,1\n\
            s1,2,2,10;0,0.5;0.5,5,1\n";
        let f = write_temp(csv);
        match parse_generic_csv(f.path()) {
            Err(Error::MalformedRecord { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected malformed record, got {other:?}"),
        }
    }

    #[test]
    fn missing_columns_rejected() {
        let f = write_temp("subject,trial,choice,a_prizes\ns1,1,1,5\n");
        assert!(matches!(parse_generic_csv(f.path()), Err(Error::MissingColumns(_))));
    }

    #[test]
    fn round_trip_is_exact() {
        let csv = "subject,trial,choice,a_prizes,a_probs,b_prizes,b_probs,state_probs,a_state_payoffs,b_state_payoffs\n\
            s1,1,0,,,,,0.25;0.25;0.5,1;2;3,3;2;1\n\
            s1,2,1,6000;0,0.001;0.999,3000;0,0.002;0.998,,,\n\
            s2,1,0,200,1,300;0,0.8;0.2,,,\n";
        let f = write_temp(csv);
        let ds = parse_generic_csv(f.path()).unwrap();
        let mut buf = Vec::new();
        write_generic_csv(&ds, &mut buf).unwrap();
        let f2 = write_temp(std::str::from_utf8(&buf).unwrap());
        let ds2 = parse_generic_csv(f2.path()).unwrap();
        assert_eq!(ds, ds2);
    }

    #[test]
    fn cpc18_basics() {
        let csv = "SubjID,Trial,Ha,pHa,La,Hb,pHb,Lb,Amb,LotShapeA,LotShapeB,B\n\
            101,1,10,0.5,0,20,0.2,-5,0,-,-,0\n\
            101,2,10,0.5,0,20,0.2,-5,1,-,-,1\n\
            101,3,8,0.25,2,6,0.75,1,0,-,-,1\n";
        let f = write_temp(csv);
        let ds = parse_cpc18(f.path()).unwrap();
        assert_eq!(ds.len(), 1);
        // The ambiguous row is dropped.
        assert_eq!(ds[0].len(), 2);
        // B=0 means option A chosen: indicator 1.
        assert_eq!(ds[0].observations[0].choice, 1);
        assert_eq!(ds[0].observations[1].choice, 0);
        let (a, b) = ds[0].observations[0].menu.lotteries();
        assert_eq!(a.prizes(), &[0.0, 10.0]);
        assert_eq!(b.prizes(), &[-5.0, 20.0]);
    }

    #[test]
    fn cpc18_rejects_nontrivial_shapes() {
        let csv = "SubjID,Trial,Ha,pHa,La,Hb,pHb,Lb,Amb,LotShapeA,LotShapeB,B\n\
            101,1,10,0.5,0,20,0.2,-5,0,Symm,-,0\n\
            101,2,10,0.5,0,20,0.2,-5,0,-,R-skew,1\n";
        let f = write_temp(csv);
        match parse_cpc18(f.path()) {
            Err(Error::UnsupportedLotShape { count }) => assert_eq!(count, 2),
            other => panic!("expected shape rejection, got {other:?}"),
        }
    }

    #[test]
    fn cpc18_missing_columns() {
        let f = write_temp("SubjID,Trial,Ha,pHa\n101,1,10,0.5\n");
        assert!(matches!(parse_cpc18(f.path()), Err(Error::MissingColumns(_))));
    }
}
