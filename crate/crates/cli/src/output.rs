//! Files written by a run: `trace.csv`, `report.json` and `fig.svg`.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use crate::scenario::RunOutput;

/// 17 significant digits, enough to round-trip any `f64`.
fn number(v: f64) -> String {
    format!("{v:.16e}")
}

/// Results table with a header row; masked values are empty fields.
pub fn csv_text(out: &RunOutput) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["t".to_string()];
    header.extend(out.columns.iter().map(|c| c.name.clone()));
    w.write_record(&header)?;
    for (i, &t) in out.times.iter().enumerate() {
        let mut row = vec![number(t)];
        row.extend(out.columns.iter().map(|c| c.values[i].map(number).unwrap_or_default()));
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("ASCII output"))
}

pub fn json_text(out: &RunOutput) -> serde_json::Result<String> {
    let mut s = serde_json::to_string_pretty(&out.report)?;
    s.push('\n');
    Ok(s)
}

/// `f·f′` against `t` with the positive windows shaded.
pub fn svg_text(out: &RunOutput) -> String {
    let (width, height, margin) = (800.0, 400.0, 50.0);
    let f = &out.column("f").expect("f column").values;
    let df = &out.column("dfdt").expect("dfdt column").values;
    let y: Vec<f64> = f.iter().zip(df).map(|(a, b)| a.unwrap_or(0.0) * b.unwrap_or(0.0)).collect();
    let t_max = out.report.t_max;
    let y_max = y.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-12);
    let px = |t: f64| margin + (width - 2.0 * margin) * t / t_max;
    let py = |v: f64| height / 2.0 - (height / 2.0 - margin) * v / y_max;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for w in &out.report.product_windows {
        let _ = writeln!(
            s,
            r##"<rect x="{:.2}" y="{margin}" width="{:.2}" height="{}" fill="#cccccc"/>"##,
            px(w[0]),
            px(w[1]) - px(w[0]),
            height - 2.0 * margin
        );
    }
    let _ = writeln!(
        s,
        r#"<line x1="{margin}" y1="{0:.2}" x2="{1}" y2="{0:.2}" stroke="black"/>"#,
        py(0.0),
        width - margin
    );
    let _ = writeln!(s, r#"<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{}" stroke="black"/>"#, height - margin);
    let points: Vec<String> = out.times.iter().zip(&y).map(|(&t, &v)| format!("{:.2},{:.2}", px(t), py(v))).collect();
    let _ = writeln!(s, r#"<polyline fill="none" stroke="navy" stroke-width="1.5" points="{}"/>"#, points.join(" "));
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="14">t</text>"#, width - margin + 10.0, py(0.0) + 5.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="14">f f'</text>"#, margin - 20.0, margin - 10.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="12">0</text>"#, px(0.0) - 4.0, height - margin + 16.0);
    let _ =
        writeln!(s, r#"<text x="{}" y="{}" font-size="12">{t_max}</text>"#, px(t_max) - 8.0, height - margin + 16.0);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="14">{}</text>"#,
        width / 2.0 - 60.0,
        margin - 20.0,
        out.report.scenario
    );
    s.push_str("</svg>\n");
    s
}

/// Write `contents` to `path` through a temporary file in the same
/// directory, then rename it into place.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Write all artifacts of a run into `dir`, returning the written paths.
pub fn write_outputs(out: &RunOutput, dir: &Path, plot: bool) -> std::io::Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let csv = csv_text(out).map_err(std::io::Error::other)?;
    let json = json_text(out).map_err(std::io::Error::other)?;
    let mut files = vec![(dir.join("trace.csv"), csv), (dir.join("report.json"), json)];
    if plot {
        files.push((dir.join("fig.svg"), svg_text(out)));
    }
    for (path, text) in &files {
        write_atomic(path, text)?;
    }
    Ok(files.into_iter().map(|(p, _)| p).collect())
}
