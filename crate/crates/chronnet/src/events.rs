//! Event data model, chronological ordering, and file ingestion.
//!
//! Events are timestamped spatial occurrences. An [`EventSet`] is the unit of
//! work for network construction: it knows whether it is sorted by timestamp
//! and can collapse runs of equal timestamps into parallel-event groups.
//!
//! Two file formats are supported: a generic `t,x,y[,extra...]` CSV used as
//! the interchange schema throughout the toolkit, and the MODIS MCD14ML
//! active-fire CSV with its confidence filter.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::ops::Range;
use std::path::Path;

use chrono::NaiveDate;

use crate::error::{Error, Result};

/// One timestamped spatial occurrence.
///
/// Timestamps are stored as `f64`: integer ticks for generated data, seconds
/// since the epoch (truncated to the chosen granularity) for satellite data.
/// Comparisons are exact on the stored representation.
#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub attrs: BTreeMap<String, String>,
}

impl Event {
    /// New event without attributes. All three coordinates must be finite.
    pub fn new(t: f64, x: f64, y: f64) -> Self {
        assert!(
            t.is_finite() && x.is_finite() && y.is_finite(),
            "event fields must be finite"
        );
        Event {
            t,
            x,
            y,
            attrs: BTreeMap::new(),
        }
    }

    pub fn with_attrs(t: f64, x: f64, y: f64, attrs: BTreeMap<String, String>) -> Self {
        let mut e = Event::new(t, x, y);
        e.attrs = attrs;
        e
    }
}

/// Ordered sequence of events plus a sortedness flag.
///
/// An empty set is permitted and propagates to an empty chronnet.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EventSet {
    events: Vec<Event>,
    sorted: bool,
}

impl EventSet {
    /// Wraps a vector of events, detecting whether it is already sorted.
    pub fn new(events: Vec<Event>) -> Self {
        let sorted = events.windows(2).all(|w| w[0].t <= w[1].t);
        EventSet { events, sorted }
    }

    pub fn empty() -> Self {
        EventSet {
            events: Vec::new(),
            sorted: true,
        }
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// True if timestamps are non-decreasing across the sequence.
    pub fn is_sorted(&self) -> bool {
        self.sorted
    }

    /// max(t) − min(t); zero for empty or single-event sets.
    pub fn span(&self) -> f64 {
        let mut it = self.events.iter().map(|e| e.t);
        match it.next() {
            None => 0.0,
            Some(first) => {
                let (min, max) = it.fold((first, first), |(lo, hi), t| (lo.min(t), hi.max(t)));
                max - min
            }
        }
    }

    /// Number of distinct timestamps.
    pub fn distinct_timestamps(&self) -> usize {
        if self.sorted {
            let mut n = 0;
            let mut last = f64::NAN;
            for e in &self.events {
                if n == 0 || e.t != last {
                    n += 1;
                    last = e.t;
                }
            }
            n
        } else {
            let mut ts: Vec<f64> = self.events.iter().map(|e| e.t).collect();
            ts.sort_by(f64::total_cmp);
            ts.dedup();
            ts.len()
        }
    }

    /// (xmin, xmax, ymin, ymax) over all events; `None` when empty.
    pub fn bounding_box(&self) -> Option<(f64, f64, f64, f64)> {
        let first = self.events.first()?;
        let mut bb = (first.x, first.x, first.y, first.y);
        for e in &self.events {
            bb.0 = bb.0.min(e.x);
            bb.1 = bb.1.max(e.x);
            bb.2 = bb.2.min(e.y);
            bb.3 = bb.3.max(e.y);
        }
        Some(bb)
    }

    /// Stable sort by timestamp. Ties keep their original order, so the
    /// result is a permutation of the input and idempotent.
    pub fn sorted(&self) -> EventSet {
        let mut events = self.events.clone();
        events.sort_by(|a, b| a.t.total_cmp(&b.t));
        EventSet {
            events,
            sorted: true,
        }
    }

    /// Collapses consecutive runs of equal timestamps into groups, in time
    /// order. Each group is an index range into [`EventSet::events`];
    /// concatenating the ranges reproduces the full sequence.
    pub fn group_parallel(&self) -> Result<Vec<(f64, Range<usize>)>> {
        if !self.sorted {
            return Err(Error::UnsortedEvents);
        }
        let mut groups = Vec::new();
        let mut start = 0;
        for i in 1..=self.events.len() {
            if i == self.events.len() || self.events[i].t != self.events[start].t {
                groups.push((self.events[start].t, start..i));
                start = i;
            }
        }
        Ok(groups)
    }
}

/// Stable sort by timestamp (free-function form of [`EventSet::sorted`]).
pub fn sort_events(es: &EventSet) -> EventSet {
    es.sorted()
}

/// Input file formats understood by [`load_events`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventFormat {
    /// Header `t,x,y[,k1,k2,...]`; extra columns become event attributes.
    GenericCsv,
    /// MODIS Collection 6 global fire-location product CSV.
    Mcd14ml { granularity: TimeGranularity },
}

impl EventFormat {
    pub fn parse(name: &str, granularity: TimeGranularity) -> Result<Self> {
        match name {
            "generic-csv" => Ok(EventFormat::GenericCsv),
            "mcd14ml-csv" => Ok(EventFormat::Mcd14ml { granularity }),
            other => Err(Error::UnknownFormat(other.to_string())),
        }
    }
}

/// Resolution to which MCD14ML acquisition date+time are truncated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TimeGranularity {
    Day,
    #[default]
    Minute,
}

impl TimeGranularity {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "day" => Ok(TimeGranularity::Day),
            "minute" => Ok(TimeGranularity::Minute),
            other => Err(Error::InvalidParameter(format!(
                "unknown granularity `{other}` (expected day|minute)"
            ))),
        }
    }
}

/// Row filters applied during ingestion.
#[derive(Debug, Clone, Default)]
pub struct FilterSpec {
    /// Keep only records whose confidence is strictly higher than this.
    pub min_confidence: Option<f64>,
}

/// Loads an event file, applying `filters`, and reports whether the result
/// arrived in chronological order.
pub fn load_events(path: &Path, format: EventFormat, filters: &FilterSpec) -> Result<EventSet> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    match format {
        EventFormat::GenericCsv => parse_generic_csv(path, &text),
        EventFormat::Mcd14ml { granularity } => parse_mcd14ml(path, &text, granularity, filters),
    }
}

/// Writes the generic `t,x,y[,...]` CSV. Attribute columns are the sorted
/// union of keys across events; absent values are written empty.
pub fn write_events(es: &EventSet, path: &Path) -> Result<()> {
    let mut keys: Vec<&str> = Vec::new();
    for e in es.events() {
        for k in e.attrs.keys() {
            if !keys.contains(&k.as_str()) {
                keys.push(k);
            }
        }
    }
    keys.sort_unstable();

    let mut out = String::from("t,x,y");
    for k in &keys {
        out.push(',');
        out.push_str(k);
    }
    out.push('\n');
    for e in es.events() {
        let _ = write!(out, "{},{},{}", e.t, e.x, e.y);
        for k in &keys {
            out.push(',');
            if let Some(v) = e.attrs.get(*k) {
                out.push_str(v);
            }
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

fn parse_field(path: &Path, line: usize, name: &str, raw: &str) -> Result<f64> {
    let v: f64 = raw
        .trim()
        .parse()
        .map_err(|_| Error::parse(path, line, format!("non-numeric {name} `{raw}`")))?;
    if !v.is_finite() {
        return Err(Error::parse(
            path,
            line,
            format!("non-finite {name} `{raw}`"),
        ));
    }
    Ok(v)
}

fn parse_generic_csv(path: &Path, text: &str) -> Result<EventSet> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(path, 1, "empty file, expected `t,x,y` header"))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.len() < 3 || cols[0] != "t" || cols[1] != "x" || cols[2] != "y" {
        return Err(Error::parse(
            path,
            1,
            format!("expected header `t,x,y[,...]`, got `{header}`"),
        ));
    }
    let attr_names: Vec<String> = cols[3..].iter().map(|s| s.to_string()).collect();

    let mut events = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != cols.len() {
            return Err(Error::parse(
                path,
                line,
                format!("expected {} fields, got {}", cols.len(), fields.len()),
            ));
        }
        let t = parse_field(path, line, "timestamp", fields[0])?;
        let x = parse_field(path, line, "x coordinate", fields[1])?;
        let y = parse_field(path, line, "y coordinate", fields[2])?;
        let mut attrs = BTreeMap::new();
        for (name, value) in attr_names.iter().zip(&fields[3..]) {
            let value = value.trim();
            if !value.is_empty() {
                attrs.insert(name.clone(), value.to_string());
            }
        }
        events.push(Event::with_attrs(t, x, y, attrs));
    }
    Ok(EventSet::new(events))
}

fn parse_mcd14ml(
    path: &Path,
    text: &str,
    granularity: TimeGranularity,
    filters: &FilterSpec,
) -> Result<EventSet> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(path, 1, "empty file, expected MCD14ML header"))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let find = |name: &str| -> Result<usize> {
        cols.iter()
            .position(|c| c.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::parse(path, 1, format!("missing column `{name}`")))
    };
    let c_date = find("acq_date")?;
    let c_time = find("acq_time")?;
    let c_lat = find("latitude")?;
    let c_lon = find("longitude")?;
    let c_conf = find("confidence")?;
    let c_type = cols.iter().position(|c| c.eq_ignore_ascii_case("type"));

    let mut events = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').map(str::trim).collect();
        if fields.len() != cols.len() {
            return Err(Error::parse(
                path,
                line,
                format!("expected {} fields, got {}", cols.len(), fields.len()),
            ));
        }
        let conf = parse_field(path, line, "confidence", fields[c_conf])?;
        if let Some(min) = filters.min_confidence {
            if conf <= min {
                continue;
            }
        }
        let lon = parse_field(path, line, "longitude", fields[c_lon])?;
        let lat = parse_field(path, line, "latitude", fields[c_lat])?;
        let t = parse_acquisition(path, line, fields[c_date], fields[c_time], granularity)?;
        let mut attrs = BTreeMap::new();
        attrs.insert("confidence".to_string(), fields[c_conf].to_string());
        if let Some(c) = c_type {
            if !fields[c].is_empty() {
                attrs.insert("type".to_string(), fields[c].to_string());
            }
        }
        events.push(Event::with_attrs(t, lon, lat, attrs));
    }
    Ok(EventSet::new(events))
}

/// Merges `acq_date` + `acq_time` into seconds since the Unix epoch,
/// truncated to the requested granularity. `acq_time` accepts `HH:MM`
/// or the packed `HMM`/`HHMM` form used in the raw product.
fn parse_acquisition(
    path: &Path,
    line: usize,
    date: &str,
    time: &str,
    granularity: TimeGranularity,
) -> Result<f64> {
    let day = NaiveDate::parse_from_str(date, "%Y-%m-%d")
        .map_err(|_| Error::parse(path, line, format!("bad acq_date `{date}`")))?;
    let days = day
        .signed_duration_since(NaiveDate::from_ymd_opt(1970, 1, 1).unwrap())
        .num_days() as f64;
    let base = days * 86_400.0;
    match granularity {
        TimeGranularity::Day => Ok(base),
        TimeGranularity::Minute => {
            let digits: String = time.chars().filter(|c| c.is_ascii_digit()).collect();
            if digits.is_empty() || digits.len() > 4 {
                return Err(Error::parse(path, line, format!("bad acq_time `{time}`")));
            }
            let packed: u32 = digits
                .parse()
                .map_err(|_| Error::parse(path, line, format!("bad acq_time `{time}`")))?;
            let (hh, mm) = (packed / 100, packed % 100);
            if hh > 23 || mm > 59 {
                return Err(Error::parse(path, line, format!("bad acq_time `{time}`")));
            }
            Ok(base + f64::from(hh * 3600 + mm * 60))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn tmp_csv(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn generic_csv_three_rows() {
        let f = tmp_csv("t,x,y\n1,0.5,0.5\n2,1.5,0.5\n3,0.5,0.5\n");
        let es = load_events(f.path(), EventFormat::GenericCsv, &FilterSpec::default()).unwrap();
        assert_eq!(es.len(), 3);
        assert!(es.is_sorted());
        assert_eq!(es.events()[1].x, 1.5);
    }

    #[test]
    fn generic_csv_header_only() {
        let f = tmp_csv("t,x,y\n");
        let es = load_events(f.path(), EventFormat::GenericCsv, &FilterSpec::default()).unwrap();
        assert!(es.is_empty());
        assert!(es.is_sorted());
    }

    #[test]
    fn generic_csv_bad_row_names_line() {
        let f = tmp_csv("t,x,y\n1,0.5,0.5\n2,oops,0.5\n");
        let err =
            load_events(f.path(), EventFormat::GenericCsv, &FilterSpec::default()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains(":3:"), "{msg}");
        assert!(msg.contains("oops"), "{msg}");
    }

    #[test]
    fn generic_csv_extra_columns_become_attrs() {
        let f = tmp_csv("t,x,y,kind\n1,0,0,alpha\n2,1,1,\n");
        let es = load_events(f.path(), EventFormat::GenericCsv, &FilterSpec::default()).unwrap();
        assert_eq!(es.events()[0].attrs.get("kind").unwrap(), "alpha");
        assert!(es.events()[1].attrs.is_empty());
    }

    #[test]
    fn unknown_format_rejected() {
        assert!(matches!(
            EventFormat::parse("parquet", TimeGranularity::Day),
            Err(Error::UnknownFormat(_))
        ));
    }

    #[test]
    fn mcd14ml_confidence_filter() {
        let f = tmp_csv(
            "latitude,longitude,acq_date,acq_time,confidence,type\n\
             -3.5,-60.1,2018-01-02,0130,80,0\n\
             -3.6,-60.2,2018-01-02,0131,60,0\n\
             10.0,20.0,2018-01-03,14:55,90,2\n",
        );
        let es = load_events(
            f.path(),
            EventFormat::Mcd14ml {
                granularity: TimeGranularity::Minute,
            },
            &FilterSpec {
                min_confidence: Some(75.0),
            },
        )
        .unwrap();
        assert_eq!(es.len(), 2);
        assert_eq!(es.events()[0].attrs.get("confidence").unwrap(), "80");
        assert_eq!(es.events()[1].attrs.get("type").unwrap(), "2");
    }

    #[test]
    fn mcd14ml_day_granularity_collapses_times() {
        let f = tmp_csv(
            "latitude,longitude,acq_date,acq_time,confidence\n\
             0.0,0.0,2018-01-02,0130,80\n\
             1.0,1.0,2018-01-02,2359,80\n",
        );
        let es = load_events(
            f.path(),
            EventFormat::Mcd14ml {
                granularity: TimeGranularity::Day,
            },
            &FilterSpec::default(),
        )
        .unwrap();
        assert_eq!(es.events()[0].t, es.events()[1].t);
    }

    #[test]
    fn sort_is_stable_on_ties() {
        let mut a = Event::new(2.0, 0.0, 0.0);
        a.attrs.insert("id".into(), "A".into());
        let mut b = Event::new(2.0, 0.0, 0.0);
        b.attrs.insert("id".into(), "B".into());
        let mut c = Event::new(1.0, 0.0, 0.0);
        c.attrs.insert("id".into(), "C".into());
        let es = EventSet::new(vec![a, b, c]);
        assert!(!es.is_sorted());
        let sorted = es.sorted();
        let ids: Vec<&str> = sorted
            .events()
            .iter()
            .map(|e| e.attrs.get("id").unwrap().as_str())
            .collect();
        assert_eq!(ids, ["C", "A", "B"]);
        assert_eq!(sorted.sorted().events(), sorted.events());
    }

    #[test]
    fn group_parallel_collapses_runs() {
        let es = EventSet::new(vec![
            Event::new(1.0, 0.0, 0.0),
            Event::new(1.0, 1.0, 0.0),
            Event::new(2.0, 2.0, 0.0),
        ]);
        let groups = es.group_parallel().unwrap();
        assert_eq!(groups.len(), 2);
        assert_eq!(groups[0], (1.0, 0..2));
        assert_eq!(groups[1], (2.0, 2..3));
    }

    #[test]
    fn group_parallel_all_distinct_and_all_equal() {
        let distinct = EventSet::new((0..4).map(|i| Event::new(i as f64, 0.0, 0.0)).collect());
        assert_eq!(distinct.group_parallel().unwrap().len(), 4);
        let equal = EventSet::new(vec![
            Event::new(5.0, 0.0, 0.0),
            Event::new(5.0, 1.0, 0.0),
            Event::new(5.0, 2.0, 0.0),
        ]);
        let groups = equal.group_parallel().unwrap();
        assert_eq!(groups.len(), 1);
        assert_eq!(groups[0].1.len(), 3);
    }

    #[test]
    fn group_parallel_rejects_unsorted() {
        let es = EventSet::new(vec![Event::new(2.0, 0.0, 0.0), Event::new(1.0, 0.0, 0.0)]);
        assert!(matches!(es.group_parallel(), Err(Error::UnsortedEvents)));
    }

    #[test]
    fn csv_round_trip_identity() {
        let mut e1 = Event::new(1.0, 0.25, -3.5);
        e1.attrs.insert("conf".into(), "81".into());
        let e2 = Event::new(2.5, 1.0, 2.0);
        let es = EventSet::new(vec![e1, e2]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("events.csv");
        write_events(&es, &path).unwrap();
        let re = load_events(&path, EventFormat::GenericCsv, &FilterSpec::default()).unwrap();
        assert_eq!(re, es);
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn sort_is_permutation_with_nondecreasing_t(ts in proptest::collection::vec(0u32..50, 0..60)) {
            let events: Vec<Event> =
                ts.iter().enumerate().map(|(i, &t)| Event::new(t as f64, i as f64, 0.0)).collect();
            let es = EventSet::new(events);
            let sorted = es.sorted();
            prop_assert!(sorted.is_sorted());
            prop_assert!(sorted.events().windows(2).all(|w| w[0].t <= w[1].t));
            let mut orig: Vec<(u64, u64)> =
                es.events().iter().map(|e| (e.t as u64, e.x as u64)).collect();
            let mut perm: Vec<(u64, u64)> =
                sorted.events().iter().map(|e| (e.t as u64, e.x as u64)).collect();
            orig.sort_unstable();
            perm.sort_unstable();
            prop_assert_eq!(orig, perm);
        }

        #[test]
        fn group_sizes_sum_to_len(ts in proptest::collection::vec(0u32..20, 0..80)) {
            let events: Vec<Event> =
                ts.iter().map(|&t| Event::new(t as f64, 0.0, 0.0)).collect();
            let es = EventSet::new(events).sorted();
            let total: usize = es.group_parallel().unwrap().iter().map(|(_, r)| r.len()).sum();
            prop_assert_eq!(total, es.len());
        }
    }
}
