use std::io::Read;
use std::path::Path;

use super::{au_name, AUFrame, CorpusError, AU_COUNT, CANONICAL_AUS};

/// Intensity assigned when a detector only reports binary presence.
pub const PRESENCE_INTENSITY: f64 = 5.0;

const MAX_INTENSITY: f64 = 5.0;

#[derive(Clone, Copy)]
enum AuColumn {
    Intensity(usize),
    Presence(usize),
}

pub fn parse_openface_csv(path: &Path) -> Result<Vec<AUFrame>, CorpusError> {
    let file = std::fs::File::open(path).map_err(|e| CorpusError::io(path, e))?;
    parse_openface_reader(file, path)
}

/// Parses OpenFace CSV text held in memory. `origin` is only used in errors.
pub fn parse_openface_str(text: &str, origin: &Path) -> Result<Vec<AUFrame>, CorpusError> {
    parse_openface_reader(text.as_bytes(), origin)
}

fn parse_openface_reader<R: Read>(reader: R, origin: &Path) -> Result<Vec<AUFrame>, CorpusError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(reader);

    let headers = rdr
        .headers()
        .map_err(|e| malformed(origin, 1, e.to_string()))?
        .clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let missing = |column: &str| CorpusError::MissingColumn { path: origin.to_path_buf(), column: column.to_string() };

    let frame_col = find("frame").ok_or_else(|| missing("frame"))?;
    let time_col = find("timestamp").ok_or_else(|| missing("timestamp"))?;
    let success_col = find("success").ok_or_else(|| missing("success"))?;

    let mut au_cols = Vec::with_capacity(AU_COUNT);
    for &au in &CANONICAL_AUS {
        let stem = au_name(au);
        let col = match (find(&format!("{stem}_r")), find(&format!("{stem}_c"))) {
            (Some(i), _) => AuColumn::Intensity(i),
            (None, Some(i)) => AuColumn::Presence(i),
            (None, None) => return Err(missing(&stem)),
        };
        au_cols.push(col);
    }

    let mut frames = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let line = row + 2;
        let record = record.map_err(|e| malformed(origin, line, e.to_string()))?;
        let line = record.position().map_or(line, |p| p.line() as usize);
        let cell = |col: usize, name: &str| -> Result<f64, CorpusError> {
            let raw = record.get(col).unwrap_or("");
            raw.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| malformed(origin, line, format!("column `{name}` holds non-numeric value `{raw}`")))
        };

        let frame = cell(frame_col, "frame")?;
        if frame < 0.0 || frame.fract() != 0.0 {
            return Err(malformed(origin, line, format!("frame index `{frame}` is not a non-negative integer")));
        }
        let timestamp = cell(time_col, "timestamp")?;
        if timestamp < 0.0 {
            return Err(malformed(origin, line, format!("negative timestamp {timestamp}")));
        }
        let success = cell(success_col, "success")? != 0.0;

        let mut intensities = [0.0; AU_COUNT];
        for (k, col) in au_cols.iter().enumerate() {
            intensities[k] = match *col {
                AuColumn::Intensity(i) => cell(i, &format!("{}_r", au_name(CANONICAL_AUS[k])))?.clamp(0.0, MAX_INTENSITY),
                AuColumn::Presence(i) => {
                    if cell(i, &format!("{}_c", au_name(CANONICAL_AUS[k])))? >= 0.5 {
                        PRESENCE_INTENSITY
                    } else {
                        0.0
                    }
                }
            };
        }

        if let Some(prev) = frames.last().map(|f: &AUFrame| f.timestamp_s) {
            if timestamp < prev {
                return Err(malformed(origin, line, format!("timestamp {timestamp} decreases from {prev}")));
            }
        }
        frames.push(AUFrame { frame_index: frame as u64, timestamp_s: timestamp, intensities, success });
    }
    Ok(frames)
}

fn malformed(path: &Path, line: usize, reason: String) -> CorpusError {
    CorpusError::MalformedRow { path: path.to_path_buf(), line, reason }
}

/// Writes frames in the column layout read by [`parse_openface_csv`].
///
/// AU28 is emitted as a presence column, the way OpenFace reports it.
pub(crate) fn write_openface_csv(frames: &[AUFrame]) -> String {
    let mut out = String::from("frame,timestamp,success");
    for &au in &CANONICAL_AUS {
        let suffix = if au == 28 { "c" } else { "r" };
        out.push_str(&format!(",{}_{suffix}", au_name(au)));
    }
    out.push('\n');
    for frame in frames {
        out.push_str(&format!("{},{},{}", frame.frame_index, frame.timestamp_s, u8::from(frame.success)));
        for (k, &au) in CANONICAL_AUS.iter().enumerate() {
            let v = frame.intensities[k];
            if au == 28 {
                out.push_str(if v >= PRESENCE_INTENSITY { ",1" } else { ",0" });
            } else {
                out.push_str(&format!(",{v}"));
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn header(skip: Option<u8>, presence_only: Option<u8>) -> String {
        let mut h = String::from("frame, timestamp, success");
        for &au in &CANONICAL_AUS {
            if Some(au) == skip {
                continue;
            }
            let suffix = if Some(au) == presence_only { "c" } else { "r" };
            h.push_str(&format!(", {}_{suffix}", au_name(au)));
        }
        h
    }

    fn row(frame: u32, t: f64, cells: &[String]) -> String {
        format!("{frame}, {t}, 1, {}", cells.join(", "))
    }

    #[test]
    fn intensities_are_read_in_canonical_order() {
        let a: Vec<String> = (0..18).map(|k| format!("{}", k as f64 * 0.25)).collect();
        let b: Vec<String> = (0..18).map(|k| format!("{}", 5.0 - k as f64 * 0.25)).collect();
        let text = format!("{}\n{}\n{}\n", header(None, None), row(1, 0.0, &a), row(2, 0.033, &b));
        let frames = parse_openface_str(&text, Path::new("x.csv")).unwrap();
        assert_eq!(frames.len(), 2);
        assert_eq!(frames[0].intensities[3], 0.75);
        assert_eq!(frames[1].intensities[17], 5.0 - 17.0 * 0.25);
        assert_eq!(frames[1].timestamp_s, 0.033);
        assert_eq!(frames[1].frame_index, 2);
        assert!(frames[0].success);
    }

    #[test]
    fn presence_only_column_maps_to_full_intensity() {
        let cells: Vec<String> = (0..18).map(|k| if k == 16 { "1".into() } else { "0".into() }).collect();
        let text = format!("{}\n{}\n", header(None, Some(28)), row(1, 0.0, &cells));
        let frames = parse_openface_str(&text, Path::new("x.csv")).unwrap();
        assert_eq!(frames[0].intensities[16], 5.0);
    }

    #[test]
    fn intensity_column_wins_over_presence() {
        let mut text = String::from("frame,timestamp,success");
        for &au in &CANONICAL_AUS {
            text.push_str(&format!(",{}_c,{}_r", au_name(au), au_name(au)));
        }
        text.push_str("\n1,0,1");
        for _ in 0..18 {
            text.push_str(",1,2.5");
        }
        let frames = parse_openface_str(&text, Path::new("x.csv")).unwrap();
        assert!(frames[0].intensities.iter().all(|&v| v == 2.5));
    }

    #[test]
    fn missing_au45_is_reported() {
        let cells: Vec<String> = vec!["0".into(); 17];
        let text = format!("{}\n{}\n", header(Some(45), None), row(1, 0.0, &cells));
        match parse_openface_str(&text, Path::new("x.csv")) {
            Err(CorpusError::MissingColumn { column, .. }) => assert_eq!(column, "AU45"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_numeric_cell_names_the_line() {
        let mut cells: Vec<String> = vec!["0".into(); 18];
        cells[4] = "abc".into();
        let text = format!("{}\n{}\n{}\n", header(None, None), row(1, 0.0, &vec!["0".into(); 18]), row(2, 0.1, &cells));
        match parse_openface_str(&text, Path::new("x.csv")) {
            Err(CorpusError::MalformedRow { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn failed_frames_are_kept() {
        let cells: Vec<String> = vec!["0".into(); 18];
        let text = format!("{}\n1, 0, 0, {}\n", header(None, None), cells.join(","));
        let frames = parse_openface_str(&text, Path::new("x.csv")).unwrap();
        assert_eq!(frames.len(), 1);
        assert!(!frames[0].success);
    }

    proptest! {
        #[test]
        fn parsed_intensities_stay_in_range(cells in proptest::collection::vec(-100.0f64..100.0, 18)) {
            let cells: Vec<String> = cells.iter().map(|v| format!("{v}")).collect();
            let text = format!("{}\n{}\n", header(None, None), row(0, 0.0, &cells));
            let frames = parse_openface_str(&text, Path::new("x.csv")).unwrap();
            prop_assert!(frames[0].intensities.iter().all(|&v| (0.0..=5.0).contains(&v)));
        }
    }
}
