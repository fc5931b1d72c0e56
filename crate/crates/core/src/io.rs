//! Obstacle map CSV: `cx,cy,l,w,theta,h,reflector`, one row per obstacle.
//! Floats use the shortest representation that round-trips exactly.

use std::io::{Read, Write};

use crate::error::{ConfigError, Error};
use crate::geometry::{Point2, RectObstacle};

pub const OBSTACLE_HEADER: [&str; 7] = ["cx", "cy", "l", "w", "theta", "h", "reflector"];

pub fn write_obstacles<W: Write>(obstacles: &[RectObstacle], out: W) -> Result<(), Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(OBSTACLE_HEADER)?;
    for o in obstacles {
        w.write_record([
            o.center.x.to_string(),
            o.center.y.to_string(),
            o.length.to_string(),
            o.width.to_string(),
            o.orientation.to_string(),
            o.height.to_string(),
            u8::from(o.is_reflector).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn obstacles_to_csv(obstacles: &[RectObstacle]) -> String {
    let mut buf = Vec::new();
    write_obstacles(obstacles, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("csv output is UTF-8")
}

pub fn read_obstacles<R: Read>(input: R) -> Result<Vec<RectObstacle>, Error> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().ne(OBSTACLE_HEADER) {
        return Err(ConfigError::Parse {
            line: 1,
            message: format!("expected header {}", OBSTACLE_HEADER.join(",")),
        }
        .into());
    }
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let num = |k: usize| -> Result<f64, ConfigError> {
            let field = rec.get(k).unwrap_or("");
            field.trim().parse::<f64>().map_err(|_| ConfigError::Parse {
                line,
                message: format!("column {}: `{field}` is not a number", OBSTACLE_HEADER[k]),
            })
        };
        let reflector = match rec.get(6).map(str::trim) {
            Some("1") | Some("true") => true,
            Some("0") | Some("false") => false,
            other => {
                return Err(ConfigError::Parse {
                    line,
                    message: format!("column reflector: `{}` is not 0/1", other.unwrap_or("")),
                }
                .into())
            }
        };
        out.push(RectObstacle::new(Point2::new(num(0)?, num(1)?), num(2)?, num(3)?, num(4)?, num(5)?, reflector));
    }
    Ok(out)
}
