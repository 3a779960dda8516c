//! Click records and the shared trace CSV format:
//! `image_id,worker_id,x,y,label,timestamp` with `label` in `{fg,bg}` and an optional timestamp.

use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "fg")]
    Foreground,
    #[serde(rename = "bg")]
    Background,
}

impl Label {
    pub fn is_foreground(self) -> bool {
        self == Label::Foreground
    }

    pub fn from_bit(bit: bool) -> Self {
        if bit {
            Label::Foreground
        } else {
            Label::Background
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Label::Foreground => Label::Background,
            Label::Background => Label::Foreground,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Foreground => "fg",
            Label::Background => "bg",
        })
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "fg" => Ok(Label::Foreground),
            "bg" => Ok(Label::Background),
            other => Err(format!("label must be `fg` or `bg`, got `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClickRecord {
    pub image_id: String,
    pub worker_id: String,
    pub x: u32,
    pub y: u32,
    pub label: Label,
    /// Milliseconds.
    pub timestamp: Option<u64>,
}

impl ClickRecord {
    pub fn new(
        image_id: impl Into<String>,
        worker_id: impl Into<String>,
        x: u32,
        y: u32,
        label: Label,
    ) -> Self {
        ClickRecord {
            image_id: image_id.into(),
            worker_id: worker_id.into(),
            x,
            y,
            label,
            timestamp: None,
        }
    }

    pub fn in_bounds(&self, width: usize, height: usize) -> bool {
        (self.x as usize) < width && (self.y as usize) < height
    }
}

/// Rejects the first click outside a `width`×`height` image.
pub fn check_bounds(clicks: &[ClickRecord], width: usize, height: usize) -> Result<()> {
    match clicks.iter().position(|c| !c.in_bounds(width, height)) {
        Some(index) => Err(Error::ClickOutOfBounds {
            index,
            x: clicks[index].x,
            y: clicks[index].y,
            width,
            height,
        }),
        None => Ok(()),
    }
}

pub const TRACE_HEADER: [&str; 6] = ["image_id", "worker_id", "x", "y", "label", "timestamp"];

pub fn parse_clicks<R: Read>(reader: R, origin: &str) -> Result<Vec<ClickRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let csv_err = |line: u64, reason: String| Error::Csv {
        origin: origin.to_string(),
        line,
        reason,
    };
    let header = rdr.headers().map_err(|e| csv_err(1, e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>() != TRACE_HEADER {
        return Err(csv_err(
            1,
            format!("expected header `{}`", TRACE_HEADER.join(",")),
        ));
    }
    let mut clicks = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            csv_err(line, e.to_string())
        })?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != TRACE_HEADER.len() {
            return Err(csv_err(
                line,
                format!("expected {} fields, found {}", TRACE_HEADER.len(), row.len()),
            ));
        }
        let coord = |i: usize| {
            row[i]
                .trim()
                .parse::<u32>()
                .map_err(|_| csv_err(line, format!("invalid {} `{}`", TRACE_HEADER[i], &row[i])))
        };
        let (x, y) = (coord(2)?, coord(3)?);
        let label = row[4].trim().parse().map_err(|e| csv_err(line, e))?;
        let timestamp = match row[5].trim() {
            "" => None,
            t => Some(
                t.parse()
                    .map_err(|_| csv_err(line, format!("invalid timestamp `{t}`")))?,
            ),
        };
        if row[0].is_empty() || row[1].is_empty() {
            return Err(csv_err(line, "empty image_id or worker_id".into()));
        }
        clicks.push(ClickRecord {
            image_id: row[0].to_string(),
            worker_id: row[1].to_string(),
            x,
            y,
            label,
            timestamp,
        });
    }
    Ok(clicks)
}

pub fn read_clicks(path: impl AsRef<Path>) -> Result<Vec<ClickRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_clicks(file, &path.display().to_string())
}

pub fn write_clicks_to<W: Write>(writer: W, clicks: &[ClickRecord]) -> std::io::Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(TRACE_HEADER)?;
    for c in clicks {
        let ts = c.timestamp.map(|t| t.to_string()).unwrap_or_default();
        wtr.write_record([
            c.image_id.as_str(),
            c.worker_id.as_str(),
            &c.x.to_string(),
            &c.y.to_string(),
            &c.label.to_string(),
            &ts,
        ])?;
    }
    wtr.flush()
}

pub fn write_clicks(path: impl AsRef<Path>, clicks: &[ClickRecord]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_clicks_to(file, clicks).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_write_round_trip() {
        let text = "image_id,worker_id,x,y,label,timestamp\nimg1,w1,3,4,fg,120\nimg1,w2,0,0,bg,\n";
        let clicks = parse_clicks(text.as_bytes(), "mem").unwrap();
        assert_eq!(clicks.len(), 2);
        assert_eq!(clicks[0].timestamp, Some(120));
        assert_eq!(clicks[1].label, Label::Background);
        assert_eq!(clicks[1].timestamp, None);
        let mut out = Vec::new();
        write_clicks_to(&mut out, &clicks).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), text);
    }

    #[test]
    fn malformed_row_reports_line() {
        let mut text = String::from("image_id,worker_id,x,y,label,timestamp\n");
        for i in 0..15 {
            text.push_str(&format!("img,w,{i},0,fg,\n"));
        }
        text.push_str("img,w,1,1,maybe,\n");
        let err = parse_clicks(text.as_bytes(), "t.csv").unwrap_err();
        assert!(err.to_string().contains("line 17"), "{err}");

        let err = parse_clicks("image_id,worker_id,x,y,label,timestamp\na,b,-1,0,fg,\n".as_bytes(), "t")
            .unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn wrong_header_rejected() {
        let err = parse_clicks("a,b\n".as_bytes(), "t").unwrap_err();
        assert!(err.to_string().contains("line 1"));
    }

    #[test]
    fn bounds() {
        let c = vec![ClickRecord::new("i", "w", 1, 1, Label::Foreground), ClickRecord::new("i", "w", 2, 0, Label::Background)];
        assert!(check_bounds(&c, 3, 2).is_ok());
        assert!(matches!(check_bounds(&c, 2, 2), Err(Error::ClickOutOfBounds { index: 1, .. })));
    }
}
