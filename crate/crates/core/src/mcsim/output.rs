use super::particle::{LossCause, LossEvent, Particle, Snapshot, Status};
use crate::{Error, Result, Vec3};
use std::fmt::Write;

pub const SNAPSHOT_HEADER: &str = "id,x,y,z,vx,vy,vz,status";
pub const LOSS_HEADER: &str = "id,t,cause";

/// Snapshot as CSV, one row per particle in id order.
pub fn snapshot_csv(snapshot: &Snapshot) -> String {
    let mut out = String::from(SNAPSHOT_HEADER);
    out.push('\n');
    for p in &snapshot.particles {
        let (x, v) = (p.position, p.velocity);
        let _ = writeln!(
            out,
            "{},{:e},{:e},{:e},{:e},{:e},{:e},{}",
            p.id,
            x.x,
            x.y,
            x.z,
            v.x,
            v.y,
            v.z,
            p.status.as_str()
        );
    }
    out
}

pub fn loss_csv(events: &[LossEvent]) -> String {
    let mut out = String::from(LOSS_HEADER);
    out.push('\n');
    for e in events {
        let _ = writeln!(out, "{},{:e},{}", e.id, e.t, e.cause);
    }
    out
}

fn parse_status(text: &str) -> Option<Status> {
    if text == "alive" {
        return Some(Status::Alive);
    }
    LossCause::ALL.into_iter().find(|c| c.as_str() == text).map(Status::Lost)
}

fn rows<'a>(text: &'a str, header: &str) -> Result<impl Iterator<Item = (usize, Vec<&'a str>)>> {
    let mut lines = text.lines();
    if lines.next() != Some(header) {
        return Err(Error::Io(format!("expected header {header:?}")));
    }
    Ok(lines
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| (i + 2, l.split(',').collect())))
}

fn field<T: std::str::FromStr>(cols: &[&str], i: usize, line: usize) -> Result<T> {
    cols.get(i)
        .and_then(|c| c.parse().ok())
        .ok_or_else(|| Error::Io(format!("line {line}: malformed column {}", i + 1)))
}

/// Parses a snapshot written by [`snapshot_csv`], stamping it with time `t`.
pub fn read_snapshot_csv(text: &str, t: f64) -> Result<Snapshot> {
    let mut particles = Vec::new();
    for (line, cols) in rows(text, SNAPSHOT_HEADER)? {
        if cols.len() != 8 {
            return Err(Error::Io(format!("line {line}: expected 8 columns")));
        }
        let v = |i| field::<f64>(&cols, i, line);
        let status = parse_status(cols[7]).ok_or_else(|| Error::Io(format!("line {line}: unknown status {:?}", cols[7])))?;
        particles.push(Particle {
            id: field(&cols, 0, line)?,
            position: Vec3::new(v(1)?, v(2)?, v(3)?),
            velocity: Vec3::new(v(4)?, v(5)?, v(6)?),
            status,
        });
    }
    Ok(Snapshot { t, particles })
}

/// Parses a loss log written by [`loss_csv`].
pub fn read_loss_csv(text: &str) -> Result<Vec<LossEvent>> {
    rows(text, LOSS_HEADER)?
        .map(|(line, cols)| {
            if cols.len() != 3 {
                return Err(Error::Io(format!("line {line}: expected 3 columns")));
            }
            let cause = match parse_status(cols[2]) {
                Some(Status::Lost(c)) => c,
                _ => return Err(Error::Io(format!("line {line}: unknown loss cause {:?}", cols[2]))),
            };
            Ok(LossEvent {
                id: field(&cols, 0, line)?,
                t: field(&cols, 1, line)?,
                cause,
            })
        })
        .collect()
}
