//! Trajectory CSV: optional `#` comment block, a fixed header, one row per
//! record. Reals carry 17 significant digits so a read-back is exact.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::sim::{Record, TrajectoryLog};
use crate::so3::Vec3;

pub const HEADER: &str = "t,j,q1,q2,e1,e2,wx,wy,wz,taux,tauy,tauz,V,U1,U2,mu1,mu2";

fn real(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        kind => Error::parse(line, format!("{kind:?}")),
    }
}

/// Writes `comments` (each line already starting with `#`), the header, and
/// every record.
pub fn write_log<W: Write>(mut out: W, comments: &str, log: &TrajectoryLog) -> Result<()> {
    out.write_all(comments.as_bytes())?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(HEADER.split(',')).map_err(csv_err)?;
    for r in &log.records {
        let row = [
            real(r.t),
            r.j.to_string(),
            r.q[0].to_string(),
            r.q[1].to_string(),
            real(r.e[0]),
            real(r.e[1]),
            real(r.omega.x),
            real(r.omega.y),
            real(r.omega.z),
            real(r.tau.x),
            real(r.tau.y),
            real(r.tau.z),
            real(r.v),
            real(r.u[0]),
            real(r.u[1]),
            real(r.mu[0]),
            real(r.mu[1]),
        ];
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_string(comments: &str, log: &TrajectoryLog) -> Result<String> {
    let mut buf = Vec::new();
    write_log(&mut buf, comments, log)?;
    String::from_utf8(buf).map_err(|e| Error::parse(0, e.to_string()))
}

/// Reads a file produced by [`write_log`]; comment lines are skipped.
pub fn read_log<R: Read>(input: R) -> Result<TrajectoryLog> {
    let mut rd = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .has_headers(true)
        .from_reader(input);
    let header = rd.headers().map_err(csv_err)?.clone();
    if header.iter().collect::<Vec<_>>().join(",") != HEADER {
        let line = header.position().map_or(0, |p| p.line() as usize);
        return Err(Error::parse(line, "unexpected CSV header"));
    }
    let mut log = TrajectoryLog::default();
    for row in rd.records() {
        let row = row.map_err(csv_err)?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        let f = |i: usize| -> Result<f64> {
            row[i]
                .parse()
                .map_err(|_| Error::parse(line, format!("column {} is not a number", i + 1)))
        };
        let n = |i: usize| -> Result<u64> {
            row[i]
                .parse()
                .map_err(|_| Error::parse(line, format!("column {} is not an integer", i + 1)))
        };
        log.records.push(Record {
            t: f(0)?,
            j: n(1)?,
            q: [n(2)? as usize, n(3)? as usize],
            e: [f(4)?, f(5)?],
            omega: Vec3::new(f(6)?, f(7)?, f(8)?),
            tau: Vec3::new(f(9)?, f(10)?, f(11)?),
            v: f(12)?,
            u: [f(13)?, f(14)?],
            mu: [f(15)?, f(16)?],
        });
    }
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> TrajectoryLog {
        let r = Record {
            t: 0.1 + 0.2,
            j: 3,
            q: [2, 1],
            e: [1.0 / 3.0, 1e-300],
            omega: Vec3::new(-0.0, 5e-324, f64::MAX),
            tau: Vec3::new(1.0, -2.5, std::f64::consts::PI),
            v: 12.345678901234567,
            u: [0.0, 7.0],
            mu: [0.1, 0.0],
        };
        TrajectoryLog {
            records: vec![r, Record { j: 4, ..r }],
        }
    }

    #[test]
    fn header_is_exact() {
        let s = to_string("# c\n", &sample()).unwrap();
        let mut lines = s.lines();
        assert_eq!(lines.next(), Some("# c"));
        assert_eq!(lines.next(), Some(HEADER));
        assert_eq!(lines.next().unwrap().split(',').count(), 17);
    }

    #[test]
    fn round_trip_is_exact() {
        let log = sample();
        let s = to_string("# comment, with comma\n", &log).unwrap();
        let back = read_log(s.as_bytes()).unwrap();
        assert_eq!(back, log);
        for (a, b) in back.records.iter().zip(&log.records) {
            assert_eq!(a.omega.x.to_bits(), b.omega.x.to_bits());
        }
    }

    #[test]
    fn rejects_wrong_header() {
        assert!(matches!(read_log("a,b\n1,2\n".as_bytes()), Err(Error::Parse { .. })));
    }
}
