//! File formats: TNTP-style network and trip tables, CSV sidecars for link
//! attributes, observed counts and OD demand, and CSV export of equilibrium
//! results.

use crate::equilibrium::{EquilibriumState, PathSpace};
use crate::error::{Error, Result};
use crate::network::{Link, Network, OdDemand, OdPair};
use std::path::Path as FsPath;

fn parse_err(file: &str, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        file: file.to_string(),
        line,
        message: message.into(),
    }
}

/// Parses a TNTP network table. Metadata lines carry `<NUMBER OF NODES>` and
/// `<NUMBER OF LINKS>`; data rows list
/// `init_node term_node capacity length free_flow_time b power ...`.
/// A zero or missing length defaults to the free-flow time (the path-size
/// computation needs positive lengths on physical links).
pub fn parse_tntp_network(text: &str, source: &str) -> Result<Vec<Link>> {
    let mut expected_links: Option<usize> = None;
    let mut links = Vec::new();
    let mut in_data = text.lines().all(|l| !l.contains("<END OF METADATA>"));
    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.trim();
        if line.contains("<END OF METADATA>") {
            in_data = true;
            continue;
        }
        if !in_data {
            if let Some(rest) = line.strip_prefix("<NUMBER OF LINKS>") {
                expected_links = Some(rest.trim().parse().map_err(|_| {
                    parse_err(source, lineno, "invalid <NUMBER OF LINKS> value")
                })?);
            }
            continue;
        }
        if line.is_empty() || line.starts_with('~') || line.starts_with('<') {
            continue;
        }
        let fields: Vec<&str> = line
            .trim_end_matches(';')
            .split_whitespace()
            .collect();
        if fields.len() < 7 {
            return Err(parse_err(
                source,
                lineno,
                format!("expected at least 7 columns, found {}", fields.len()),
            ));
        }
        let num = |i: usize| -> Result<f64> {
            fields[i]
                .parse::<f64>()
                .map_err(|_| parse_err(source, lineno, format!("bad number `{}`", fields[i])))
        };
        let from = num(0)? as usize;
        let to = num(1)? as usize;
        let capacity = num(2)?;
        let length = num(3)?;
        let free_flow_time = num(4)?;
        let alpha = num(5)?;
        let beta = num(6)?;
        let link = Link {
            id: links.len(),
            from_node: from,
            to_node: to,
            free_flow_time,
            capacity,
            bpr_alpha: alpha,
            bpr_beta: beta,
            length: if length > 0.0 { length } else { free_flow_time },
            is_connector: false,
        };
        link.validate()
            .map_err(|e| parse_err(source, lineno, e.to_string()))?;
        links.push(link);
    }
    if let Some(expected) = expected_links {
        if links.len() != expected {
            return Err(Error::Structure(format!(
                "{source}: metadata announces {expected} links, parsed {}",
                links.len()
            )));
        }
    }
    if links.is_empty() {
        return Err(Error::Structure(format!("{source}: no links parsed")));
    }
    Ok(links)
}

/// Parses a TNTP trip table (`Origin` blocks with `dest : demand;` entries).
/// Zero-demand cells are dropped.
pub fn parse_tntp_trips(text: &str, source: &str) -> Result<OdDemand> {
    let mut pairs = Vec::new();
    let mut origin: Option<usize> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('~') || line.starts_with('<') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("Origin") {
            origin = Some(
                rest.trim()
                    .parse()
                    .map_err(|_| parse_err(source, lineno, "bad origin id"))?,
            );
            continue;
        }
        let o = origin.ok_or_else(|| parse_err(source, lineno, "demand before any Origin"))?;
        for cell in line.split(';') {
            let cell = cell.trim();
            if cell.is_empty() {
                continue;
            }
            let (d, q) = cell
                .split_once(':')
                .ok_or_else(|| parse_err(source, lineno, format!("bad cell `{cell}`")))?;
            let d: usize = d
                .trim()
                .parse()
                .map_err(|_| parse_err(source, lineno, "bad destination id"))?;
            let q: f64 = q
                .trim()
                .parse()
                .map_err(|_| parse_err(source, lineno, "bad demand value"))?;
            if q > 0.0 {
                pairs.push(OdPair {
                    origin: o,
                    destination: d,
                    demand: q,
                });
            }
        }
    }
    OdDemand::new(pairs)
}

/// Parses `origin,destination,demand` CSV (with header).
pub fn parse_od_csv(text: &str, source: &str) -> Result<OdDemand> {
    let mut pairs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.trim();
        if line.is_empty() || (lineno == 1 && line.to_lowercase().starts_with("origin")) {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(parse_err(source, lineno, "expected origin,destination,demand"));
        }
        pairs.push(OdPair {
            origin: fields[0]
                .parse()
                .map_err(|_| parse_err(source, lineno, "bad origin"))?,
            destination: fields[1]
                .parse()
                .map_err(|_| parse_err(source, lineno, "bad destination"))?,
            demand: fields[2]
                .parse()
                .map_err(|_| parse_err(source, lineno, "bad demand"))?,
        });
    }
    OdDemand::new(pairs)
}

/// Parses the attribute sidecar: header `link_id,<attr>...`, one row per
/// link (1-based ids matching the network file row order). An optional
/// `is_connector` column (0/1) flags centroid connectors instead of adding
/// an attribute; connector rows get zero attributes and zero length.
pub fn apply_attributes_csv(links: &mut [Link], text: &str, source: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(source, 1, "empty attribute file"))?;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    if columns.first() != Some(&"link_id") {
        return Err(parse_err(source, 1, "first column must be link_id"));
    }
    let connector_col = columns.iter().position(|c| *c == "is_connector");
    let attr_names: Vec<String> = columns[1..]
        .iter()
        .filter(|c| **c != "is_connector")
        .map(|c| c.to_string())
        .collect();
    let mut rows = vec![vec![0.0; attr_names.len()]; links.len()];
    let mut filled = vec![false; links.len()];
    for (lineno, raw) in lines {
        let lineno = lineno + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != columns.len() {
            return Err(parse_err(source, lineno, "column count mismatch"));
        }
        let id: usize = fields[0]
            .parse()
            .map_err(|_| parse_err(source, lineno, "bad link_id"))?;
        if id == 0 || id > links.len() {
            return Err(parse_err(source, lineno, format!("link_id {id} out of range")));
        }
        let row = id - 1;
        if filled[row] {
            return Err(parse_err(source, lineno, format!("duplicate link_id {id}")));
        }
        filled[row] = true;
        let mut k = 0;
        for (c, field) in fields.iter().enumerate().skip(1) {
            let value: f64 = field
                .parse()
                .map_err(|_| parse_err(source, lineno, format!("bad value `{field}`")))?;
            if Some(c) == connector_col {
                if value != 0.0 {
                    links[row].is_connector = true;
                    links[row].length = 0.0;
                }
            } else {
                rows[row][k] = value;
                k += 1;
            }
        }
    }
    for (row, link) in rows.iter_mut().zip(links.iter()) {
        if link.is_connector {
            row.iter_mut().for_each(|v| *v = 0.0);
        }
    }
    Ok((attr_names, rows))
}

/// Parses `link_id,count` CSV (1-based link ids).
pub fn parse_counts_csv(text: &str, source: &str) -> Result<Vec<(usize, f64)>> {
    let mut entries = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.trim();
        if line.is_empty() || (lineno == 1 && line.to_lowercase().starts_with("link_id")) {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() < 2 {
            return Err(parse_err(source, lineno, "expected link_id,count"));
        }
        let id: usize = fields[0]
            .parse()
            .map_err(|_| parse_err(source, lineno, "bad link_id"))?;
        if id == 0 {
            return Err(parse_err(source, lineno, "link ids are 1-based"));
        }
        let count: f64 = fields[1]
            .parse()
            .map_err(|_| parse_err(source, lineno, "bad count"))?;
        entries.push((id - 1, count));
    }
    Ok(entries)
}

/// Loads a network from a TNTP file plus an optional attribute sidecar.
pub fn load_network(net_path: &FsPath, attributes_path: Option<&FsPath>) -> Result<Network> {
    let text = std::fs::read_to_string(net_path)?;
    let mut links = parse_tntp_network(&text, &net_path.display().to_string())?;
    let (names, rows) = match attributes_path {
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            apply_attributes_csv(&mut links, &text, &p.display().to_string())?
        }
        None => (Vec::new(), Vec::new()),
    };
    Network::with_attributes(links, rows, names)
}

/// Loads OD demand from either a TNTP trip table or a CSV file, keyed on the
/// extension.
pub fn load_od(path: &FsPath) -> Result<OdDemand> {
    let text = std::fs::read_to_string(path)?;
    let name = path.display().to_string();
    if path
        .extension()
        .map(|e| e.eq_ignore_ascii_case("csv"))
        .unwrap_or(false)
    {
        parse_od_csv(&text, &name)
    } else {
        parse_tntp_trips(&text, &name)
    }
}

/// Formats a float with six significant digits (full precision stays in the
/// JSON outputs).
pub fn fmt_sig6(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).clamp(0, 17) as usize;
    format!("{v:.decimals$}")
}

/// `link_id,flow,travel_time` rows for an equilibrium state (1-based ids).
pub fn links_csv(state: &EquilibriumState) -> String {
    let mut out = String::from("link_id,flow,travel_time\n");
    for (a, (x, t)) in state
        .link_flows
        .iter()
        .zip(&state.travel_times)
        .enumerate()
    {
        out.push_str(&format!("{},{},{}\n", a + 1, fmt_sig6(*x), fmt_sig6(*t)));
    }
    out
}

/// `path_id,od,probability,flow` rows for an equilibrium state.
pub fn paths_csv(state: &EquilibriumState, space: &PathSpace, od: &OdDemand) -> String {
    let mut out = String::from("path_id,od,probability,flow\n");
    let inc = space.incidence();
    for h in 0..inc.num_paths() {
        let w = inc.od_of_path(h);
        let pair = od.pairs()[w];
        out.push_str(&format!(
            "{},{}-{},{},{}\n",
            h + 1,
            pair.origin,
            pair.destination,
            fmt_sig6(state.probabilities[h]),
            fmt_sig6(state.path_flows[h]),
        ));
    }
    out
}

/// Writes a file atomically (temp file in the same directory, then rename).
pub fn write_atomic(path: &FsPath, contents: &str) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| FsPath::new("."));
    std::fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(
        ".{}.tmp",
        path.file_name()
            .map(|n| n.to_string_lossy().to_string())
            .unwrap_or_else(|| "out".into())
    ));
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const NET: &str = "\
<NUMBER OF NODES> 3
<NUMBER OF LINKS> 3
<END OF METADATA>
~ init term capacity length fft b power speed toll type ;
1 2 100.0 4.0 4.0 0.15 4 0 0 1 ;
2 3 150.0 0.0 5.0 0.15 4 0 0 1 ;
1 3 120.0 8.0 8.0 0.15 4 0 0 1 ;
";

    #[test]
    fn parses_tntp_network() {
        let links = parse_tntp_network(NET, "test").unwrap();
        assert_eq!(links.len(), 3);
        assert_eq!(links[0].from_node, 1);
        assert_eq!(links[1].capacity, 150.0);
        // Zero length defaults to the free-flow time.
        assert_eq!(links[1].length, 5.0);
    }

    #[test]
    fn rejects_malformed_row() {
        let bad = "<END OF METADATA>\n1 2 100.0\n";
        match parse_tntp_network(bad, "bad.tntp") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn parses_trips() {
        let trips = "\
<TOTAL OD FLOWS> 60.0
<END OF METADATA>

Origin  1
    2 :    10.0;    3 :    20.0;

Origin 2
    3 :    30.0;  1 : 0.0;
";
        let od = parse_tntp_trips(trips, "trips").unwrap();
        assert_eq!(od.len(), 3);
        assert_eq!(od.total_demand(), 60.0);
    }

    #[test]
    fn parses_od_csv_and_counts() {
        let od = parse_od_csv("origin,destination,demand\n1,3,25.5\n2,3,10\n", "od.csv").unwrap();
        assert_eq!(od.len(), 2);
        assert_eq!(od.pairs()[0].demand, 25.5);
        let counts = parse_counts_csv("link_id,count\n1,100.5\n3,-2.0\n", "c.csv").unwrap();
        assert_eq!(counts, vec![(0, 100.5), (2, -2.0)]);
    }

    #[test]
    fn attributes_with_connector_flag() {
        let mut links = parse_tntp_network(NET, "test").unwrap();
        let csv = "link_id,toll,is_connector\n1,0.5,0\n2,9.9,1\n3,1.5,0\n";
        let (names, rows) = apply_attributes_csv(&mut links, csv, "attr.csv").unwrap();
        assert_eq!(names, vec!["toll".to_string()]);
        assert!(links[1].is_connector);
        assert_eq!(links[1].length, 0.0);
        // Connector attributes forced to zero.
        assert_eq!(rows[1], vec![0.0]);
        assert_eq!(rows[0], vec![0.5]);
    }

    #[test]
    fn six_significant_digits() {
        assert_eq!(fmt_sig6(0.0), "0");
        assert_eq!(fmt_sig6(1.0), "1.00000");
        assert_eq!(fmt_sig6(123.456789), "123.457");
        assert_eq!(fmt_sig6(0.000123456789), "0.000123457");
        assert_eq!(fmt_sig6(1234567.0), "1234567");
    }
}
