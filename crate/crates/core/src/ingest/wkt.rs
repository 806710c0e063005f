//! Well-known text for the geometry kinds the fence pipeline uses:
//! `POINT`, `POLYGON` and `MULTIPOLYGON`, with an optional `SRID=n;` prefix.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::{GeoPoint, MultiPolygonShape, PolygonShape, Ring, SRID_WGS84};

#[derive(Debug, Clone, PartialEq)]
pub enum WktGeometry {
    Point(GeoPoint),
    Polygon(PolygonShape),
    MultiPolygon(MultiPolygonShape),
}

impl WktGeometry {
    /// Polygon kinds widened to a multipolygon; points are rejected.
    pub fn into_multipolygon(self) -> Result<MultiPolygonShape> {
        match self {
            WktGeometry::Polygon(p) => MultiPolygonShape::new(vec![p]),
            WktGeometry::MultiPolygon(m) => Ok(m),
            WktGeometry::Point(_) => Err(Error::InvalidGeometry(
                "POINT cannot be used as a polygon geometry".into(),
            )),
        }
    }
}

pub fn parse_wkt(text: &str) -> Result<WktGeometry> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        srid: SRID_WGS84,
    };
    p.skip_ws();
    if p.eat_keyword("SRID") {
        p.expect(b'=')?;
        let start = p.pos;
        let n = p.number()?;
        if n.fract() != 0.0 || n.abs() > f64::from(i32::MAX) {
            return Err(p.error_at(start, "SRID must be an integer"));
        }
        p.srid = n as i32;
        p.expect(b';')?;
        p.skip_ws();
    }
    let geom = if p.eat_keyword("MULTIPOLYGON") {
        p.expect(b'(')?;
        let mut polys = vec![p.polygon()?];
        while p.eat(b',') {
            polys.push(p.polygon()?);
        }
        p.expect(b')')?;
        WktGeometry::MultiPolygon(MultiPolygonShape::new(polys)?)
    } else if p.eat_keyword("POLYGON") {
        WktGeometry::Polygon(p.polygon()?)
    } else if p.eat_keyword("POINT") {
        p.expect(b'(')?;
        let pt = p.coord()?;
        p.expect(b')')?;
        WktGeometry::Point(pt)
    } else {
        return Err(p.error("expected POINT, POLYGON or MULTIPOLYGON"));
    };
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("trailing characters after geometry"));
    }
    Ok(geom)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    srid: i32,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> Error {
        self.error_at(self.pos, message)
    }

    fn error_at(&self, offset: usize, message: &str) -> Error {
        Error::Wkt {
            offset,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, b: u8) -> bool {
        self.skip_ws();
        if self.src.get(self.pos) == Some(&b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, b: u8) -> Result<()> {
        if self.eat(b) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{}`", b as char)))
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        self.skip_ws();
        let end = self.pos + kw.len();
        if end > self.src.len() || !self.src[self.pos..end].eq_ignore_ascii_case(kw.as_bytes()) {
            return false;
        }
        // reject prefixes such as POINTZ
        if self.src.get(end).is_some_and(|b| b.is_ascii_alphanumeric()) {
            return false;
        }
        self.pos = end;
        true
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && matches!(self.src[self.pos], b'0'..=b'9' | b'+' | b'-' | b'.' | b'e' | b'E')
        {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected a number"));
        }
        // the scanned bytes are ASCII, so this cannot fail
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or_default();
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(self.error_at(start, &format!("invalid number `{text}`"))),
        }
    }

    fn at_number(&mut self) -> bool {
        self.skip_ws();
        matches!(self.src.get(self.pos), Some(b'0'..=b'9' | b'+' | b'-' | b'.'))
    }

    fn coord(&mut self) -> Result<GeoPoint> {
        self.skip_ws();
        let start = self.pos;
        let x = self.number()?;
        if !self.at_number() {
            return Err(self.error_at(start, "coordinate needs two ordinates"));
        }
        let y = self.number()?;
        if self.at_number() {
            return Err(self.error_at(start, "coordinate has more than two ordinates"));
        }
        GeoPoint::with_srid(x, y, self.srid).map_err(|e| self.error_at(start, &e.to_string()))
    }

    fn ring(&mut self) -> Result<Ring> {
        self.skip_ws();
        let start = self.pos;
        self.expect(b'(')?;
        let mut pts = vec![self.coord()?];
        while self.eat(b',') {
            pts.push(self.coord()?);
        }
        self.expect(b')')?;
        Ring::new(pts).map_err(|e| self.error_at(start, &e.to_string()))
    }

    fn polygon(&mut self) -> Result<PolygonShape> {
        self.expect(b'(')?;
        let outer = self.ring()?;
        let mut holes = Vec::new();
        while self.eat(b',') {
            holes.push(self.ring()?);
        }
        self.expect(b')')?;
        PolygonShape::new(outer, holes)
    }
}

fn srid_prefix(out: &mut String, srid: i32) {
    if srid != SRID_WGS84 {
        let _ = write!(out, "SRID={srid};");
    }
}

fn write_ring(out: &mut String, ring: &Ring) {
    out.push('(');
    for (i, p) in ring.points().iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        // shortest round-trip float formatting
        let _ = write!(out, "{} {}", p.lon(), p.lat());
    }
    out.push(')');
}

fn write_polygon(out: &mut String, poly: &PolygonShape) {
    out.push('(');
    for (i, ring) in poly.rings().enumerate() {
        if i > 0 {
            out.push(',');
        }
        write_ring(out, ring);
    }
    out.push(')');
}

pub fn serialize_wkt(geom: &WktGeometry) -> String {
    let mut out = String::new();
    match geom {
        WktGeometry::Point(p) => {
            srid_prefix(&mut out, p.srid());
            let _ = write!(out, "POINT({} {})", p.lon(), p.lat());
        }
        WktGeometry::Polygon(poly) => {
            srid_prefix(&mut out, poly.srid());
            out.push_str("POLYGON");
            write_polygon(&mut out, poly);
        }
        WktGeometry::MultiPolygon(m) => {
            srid_prefix(&mut out, m.polygons.first().map_or(SRID_WGS84, |p| p.srid()));
            out.push_str("MULTIPOLYGON(");
            for (i, poly) in m.polygons.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_polygon(&mut out, poly);
            }
            out.push(')');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const HOUSE: &str = "MULTIPOLYGON(((13.7244306 51.0336413,13.7245794 51.033782,13.7248143 51.0336837,13.7246655 51.033543,13.7244306 51.0336413)))";

    #[test]
    fn house_multipolygon() {
        let m = parse_wkt(HOUSE).unwrap().into_multipolygon().unwrap();
        assert_eq!(m.polygons.len(), 1);
        let pts = m.polygons[0].outer.points();
        assert_eq!(pts.len(), 5);
        assert_eq!((pts[0].lon(), pts[0].lat()), (13.7244306, 51.0336413));
        assert_eq!(pts[0], pts[4]);
        assert_eq!(serialize_wkt(&WktGeometry::MultiPolygon(m)), HOUSE);
    }

    #[test]
    fn minimal_triangle() {
        match parse_wkt("POLYGON((0 0,1 0,1 1,0 0))").unwrap() {
            WktGeometry::Polygon(p) => assert_eq!(p.outer.points().len(), 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn point_srid_and_case() {
        let g = parse_wkt("SRID=27700; point ( 1.5  2.5 )").unwrap();
        match &g {
            WktGeometry::Point(p) => assert_eq!((p.lon(), p.lat(), p.srid()), (1.5, 2.5, 27700)),
            other => panic!("{other:?}"),
        }
        assert_eq!(serialize_wkt(&g), "SRID=27700;POINT(1.5 2.5)");
        assert!(g.into_multipolygon().is_err());
    }

    #[test]
    fn polygon_with_hole() {
        let text = "POLYGON((0 0,10 0,10 10,0 10,0 0),(2 2,3 2,3 3,2 2))";
        let g = parse_wkt(text).unwrap();
        match &g {
            WktGeometry::Polygon(p) => assert_eq!(p.holes.len(), 1),
            other => panic!("{other:?}"),
        }
        assert_eq!(serialize_wkt(&g), text);
    }

    fn offset_of(text: &str) -> usize {
        match parse_wkt(text) {
            Err(Error::Wkt { offset, .. }) => offset,
            other => panic!("expected wkt error for {text:?}, got {other:?}"),
        }
    }

    #[test]
    fn error_offsets() {
        // missing closing paren
        assert_eq!(offset_of("POLYGON((0 0,1 0,1 1,0 0)"), 25);
        // odd ordinate count
        assert_eq!(offset_of("POLYGON((0 0,1 0,1,0 0))"), 17);
        assert_eq!(offset_of("POLYGON((0 0 0,1 0,1 1,0 0))"), 9);
        // open ring reported at the ring start
        assert_eq!(offset_of("POLYGON((0 0,1 0,1 1,0 1))"), 8);
        assert_eq!(offset_of("LINESTRING(0 0,1 1)"), 0);
        assert_eq!(offset_of("POINT(1 2) x"), 11);
        assert_eq!(offset_of("POINTZ(1 2 3)"), 0);
        assert_eq!(offset_of(""), 0);
        assert_eq!(offset_of("POINT(1e999 2)"), 6);
        assert_eq!(offset_of("POINT(200 2)"), 6);
    }
}
