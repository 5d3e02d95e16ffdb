//! Reader and writer for the Bookshelf placement format subset
//! (`.aux`, `.nodes`, `.nets`, `.pl`, optional `.scl`).
//!
//! All files are whitespace-separated tokens with `#` comments and a leading
//! `UCLA <kind> 1.0` banner. `:` is always a token of its own, so
//! `NumNodes:3` and `NumNodes : 3` read the same. See `docs/bookshelf.md`
//! for the accepted grammar.

use std::collections::HashMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use log::warn;

use super::{Cell, CellKind, Design, Net, NetlistError, Pin, Region, Row};
use crate::Placement;

/// A named in-memory file. The name only appears in diagnostics.
#[derive(Debug, Clone)]
pub struct Source {
    pub name: String,
    pub text: String,
}

impl Source {
    pub fn new(name: impl Into<String>, text: impl Into<String>) -> Self {
        Source {
            name: name.into(),
            text: text.into(),
        }
    }

    fn read(path: &Path) -> Result<Self, NetlistError> {
        if !path.is_file() {
            return Err(NetlistError::MissingFile(path.to_path_buf()));
        }
        let text = fs::read_to_string(path).map_err(|source| NetlistError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(Source::new(path.display().to_string(), text))
    }
}

/// The file set that makes up one Bookshelf design.
#[derive(Debug, Clone)]
pub struct BookshelfSources {
    pub nodes: Source,
    pub nets: Source,
    pub pl: Source,
    pub scl: Option<Source>,
}

// ---------------------------------------------------------------------------
// Tokenizing

struct Line<'a> {
    number: usize,
    raw: &'a str,
    tokens: Vec<&'a str>,
}

fn split_tokens(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    for word in s.split_whitespace() {
        let mut rest = word;
        while let Some(pos) = rest.find(':') {
            if pos > 0 {
                out.push(&rest[..pos]);
            }
            out.push(":");
            rest = &rest[pos + 1..];
        }
        if !rest.is_empty() {
            out.push(rest);
        }
    }
    out
}

/// Significant lines: comments stripped, blank lines and the `UCLA` banner
/// dropped.
fn lines(text: &str) -> impl Iterator<Item = Line<'_>> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let body = raw.split('#').next().unwrap_or("");
        let tokens = split_tokens(body);
        if tokens.is_empty() || tokens[0] == "UCLA" {
            None
        } else {
            Some(Line {
                number: i + 1,
                raw: raw.trim(),
                tokens,
            })
        }
    })
}

struct Ctx<'a> {
    file: &'a str,
}

impl Ctx<'_> {
    fn malformed(&self, line: &Line<'_>, reason: impl Into<String>) -> NetlistError {
        NetlistError::MalformedLine {
            file: self.file.to_string(),
            line: line.number,
            context: line.raw.chars().take(120).collect(),
            reason: reason.into(),
        }
    }

    fn number(&self, line: &Line<'_>, tok: Option<&&str>, what: &str) -> Result<f64, NetlistError> {
        let tok = tok.ok_or_else(|| self.malformed(line, format!("missing {what}")))?;
        match tok.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(self.malformed(line, format!("bad {what} `{tok}`"))),
        }
    }

    fn count(
        &self,
        line: &Line<'_>,
        tok: Option<&&str>,
        what: &str,
    ) -> Result<usize, NetlistError> {
        let tok = tok.ok_or_else(|| self.malformed(line, format!("missing {what}")))?;
        tok.parse::<usize>()
            .map_err(|_| self.malformed(line, format!("bad {what} `{tok}`")))
    }

    /// `Key : value` header; returns the value token.
    fn header_value<'t>(&self, line: &'t Line<'_>) -> Result<&'t &'t str, NetlistError> {
        match line.tokens.as_slice() {
            [_, ":", value, ..] => Ok(value),
            _ => Err(self.malformed(line, "expected `Key : value`")),
        }
    }
}

fn is_header(line: &Line<'_>) -> bool {
    line.tokens.get(1) == Some(&":")
}

// ---------------------------------------------------------------------------
// .aux

/// Files listed in an `.aux` manifest, classified by extension.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AuxFile {
    pub nodes: Option<String>,
    pub nets: Option<String>,
    pub pl: Option<String>,
    pub scl: Option<String>,
    pub other: Vec<String>,
}

pub fn parse_aux(text: &str, file: &str) -> Result<AuxFile, NetlistError> {
    let ctx = Ctx { file };
    let mut aux = AuxFile::default();
    for line in lines(text) {
        let files = match line.tokens.as_slice() {
            [_, ":", rest @ ..] => rest,
            _ => return Err(ctx.malformed(&line, "expected `Kind : file ...`")),
        };
        for &f in files {
            let ext = Path::new(f)
                .extension()
                .and_then(|e| e.to_str())
                .unwrap_or("");
            let slot = match ext {
                "nodes" => &mut aux.nodes,
                "nets" => &mut aux.nets,
                "pl" => &mut aux.pl,
                "scl" => &mut aux.scl,
                _ => {
                    warn!("{file}: skipping unsupported file `{f}`");
                    aux.other.push(f.to_string());
                    continue;
                }
            };
            if slot.is_some() {
                return Err(ctx.malformed(&line, format!("more than one .{ext} file")));
            }
            *slot = Some(f.to_string());
        }
    }
    Ok(aux)
}

// ---------------------------------------------------------------------------
// .nodes

#[derive(Debug, Clone, PartialEq)]
pub struct NodeRecord {
    pub name: String,
    pub width: f64,
    pub height: f64,
    pub terminal: bool,
    pub line: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct NodesFile {
    pub num_nodes: Option<usize>,
    pub num_terminals: Option<usize>,
    pub nodes: Vec<NodeRecord>,
}

pub fn parse_nodes(text: &str, file: &str) -> Result<NodesFile, NetlistError> {
    let ctx = Ctx { file };
    let mut out = NodesFile::default();
    for line in lines(text) {
        if is_header(&line) {
            let value = ctx.header_value(&line)?;
            match line.tokens[0] {
                "NumNodes" => out.num_nodes = Some(ctx.count(&line, Some(value), "NumNodes")?),
                "NumTerminals" => {
                    out.num_terminals = Some(ctx.count(&line, Some(value), "NumTerminals")?)
                }
                key => warn!("{file}:{}: skipping unknown header `{key}`", line.number),
            }
            continue;
        }
        let t = &line.tokens;
        let width = ctx.number(&line, t.get(1), "width")?;
        let height = ctx.number(&line, t.get(2), "height")?;
        let terminal = match t.get(3).copied() {
            None => false,
            Some("terminal") | Some("terminal_NI") => true,
            Some(other) => return Err(ctx.malformed(&line, format!("unexpected token `{other}`"))),
        };
        if t.len() > 4 {
            return Err(ctx.malformed(&line, "trailing tokens"));
        }
        out.nodes.push(NodeRecord {
            name: t[0].to_string(),
            width,
            height,
            terminal,
            line: line.number,
        });
    }
    if let Some(declared) = out.num_nodes {
        if declared != out.nodes.len() {
            return Err(NetlistError::CountMismatch {
                file: file.into(),
                what: "nodes",
                declared,
                found: out.nodes.len(),
            });
        }
    }
    if let Some(declared) = out.num_terminals {
        let found = out.nodes.iter().filter(|n| n.terminal).count();
        if declared != found {
            return Err(NetlistError::CountMismatch {
                file: file.into(),
                what: "terminals",
                declared,
                found,
            });
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// .nets

#[derive(Debug, Clone, PartialEq)]
pub struct PinRecord {
    pub cell: String,
    pub dx: f64,
    pub dy: f64,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetRecord {
    pub name: String,
    pub pins: Vec<PinRecord>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct NetsFile {
    pub num_nets: Option<usize>,
    pub num_pins: Option<usize>,
    pub nets: Vec<NetRecord>,
}

pub fn parse_nets(text: &str, file: &str) -> Result<NetsFile, NetlistError> {
    let ctx = Ctx { file };
    let mut out = NetsFile::default();
    // (declared degree, line of the NetDegree statement)
    let mut pending: Option<(usize, usize)> = None;

    let close = |out: &NetsFile, pending: Option<(usize, usize)>| -> Result<(), NetlistError> {
        if let Some((degree, line)) = pending {
            let found = out.nets.last().map_or(0, |n| n.pins.len());
            if found != degree {
                return Err(NetlistError::MalformedLine {
                    file: file.into(),
                    line,
                    context: out.nets.last().map(|n| n.name.clone()).unwrap_or_default(),
                    reason: format!("NetDegree {degree} but {found} pin lines follow"),
                });
            }
        }
        Ok(())
    };

    for line in lines(text) {
        if is_header(&line) && line.tokens[0] != "NetDegree" {
            // A pin line may look like `cell : dx dy` when the direction is
            // omitted, so only treat known keys as headers inside a net.
            match line.tokens[0] {
                "NumNets" => {
                    out.num_nets =
                        Some(ctx.count(&line, Some(ctx.header_value(&line)?), "NumNets")?);
                    continue;
                }
                "NumPins" => {
                    out.num_pins =
                        Some(ctx.count(&line, Some(ctx.header_value(&line)?), "NumPins")?);
                    continue;
                }
                key if pending.is_none() => {
                    warn!("{file}:{}: skipping unknown header `{key}`", line.number);
                    continue;
                }
                _ => {}
            }
        }
        if line.tokens[0] == "NetDegree" {
            close(&out, pending)?;
            let degree = ctx.count(&line, Some(ctx.header_value(&line)?), "NetDegree")?;
            let name = match line.tokens.get(3) {
                Some(n) => n.to_string(),
                None => format!("net{}", out.nets.len()),
            };
            if line.tokens.len() > 4 {
                return Err(ctx.malformed(&line, "trailing tokens"));
            }
            out.nets.push(NetRecord {
                name,
                pins: Vec::with_capacity(degree.min(1 << 16)),
            });
            pending = Some((degree, line.number));
            continue;
        }
        let Some((degree, _)) = pending else {
            return Err(ctx.malformed(&line, "pin line outside of a net"));
        };
        let net = out.nets.last_mut().expect("pending net exists");
        if net.pins.len() == degree {
            return Err(ctx.malformed(&line, format!("more than NetDegree {degree} pins")));
        }
        let t = &line.tokens;
        let mut rest = &t[1..];
        if let Some(dir) = rest.first() {
            if *dir != ":" {
                if !matches!(*dir, "I" | "O" | "B") {
                    return Err(ctx.malformed(&line, format!("bad pin direction `{dir}`")));
                }
                rest = &rest[1..];
            }
        }
        let (dx, dy) = match rest {
            [] => (0.0, 0.0),
            [":", dx, dy] => (
                ctx.number(&line, Some(dx), "pin x offset")?,
                ctx.number(&line, Some(dy), "pin y offset")?,
            ),
            _ => return Err(ctx.malformed(&line, "expected `cell [dir] [: dx dy]`")),
        };
        net.pins.push(PinRecord {
            cell: t[0].to_string(),
            dx,
            dy,
            line: line.number,
        });
    }
    close(&out, pending)?;

    if let Some(declared) = out.num_nets {
        if declared != out.nets.len() {
            return Err(NetlistError::CountMismatch {
                file: file.into(),
                what: "nets",
                declared,
                found: out.nets.len(),
            });
        }
    }
    if let Some(declared) = out.num_pins {
        let found = out.nets.iter().map(|n| n.pins.len()).sum();
        if declared != found {
            return Err(NetlistError::CountMismatch {
                file: file.into(),
                what: "pins",
                declared,
                found,
            });
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// .pl

#[derive(Debug, Clone, PartialEq)]
pub struct PlRecord {
    pub name: String,
    /// Lower-left corner.
    pub x: f64,
    pub y: f64,
    pub fixed: bool,
    pub line: usize,
}

pub fn parse_pl(text: &str, file: &str) -> Result<Vec<PlRecord>, NetlistError> {
    let ctx = Ctx { file };
    let mut out = Vec::new();
    for line in lines(text) {
        let t = &line.tokens;
        let x = ctx.number(&line, t.get(1), "x")?;
        let y = ctx.number(&line, t.get(2), "y")?;
        let mut rest = &t[3..];
        if rest.first() == Some(&":") {
            // orientation
            if rest.len() < 2 {
                return Err(ctx.malformed(&line, "missing orientation after `:`"));
            }
            rest = &rest[2..];
        }
        let fixed = match rest {
            [] => false,
            ["/FIXED"] | ["/FIXED_NI"] => true,
            _ => return Err(ctx.malformed(&line, "expected `name x y [: orient] [/FIXED]`")),
        };
        out.push(PlRecord {
            name: t[0].to_string(),
            x,
            y,
            fixed,
            line: line.number,
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// .scl

pub fn parse_scl(text: &str, file: &str) -> Result<Vec<Row>, NetlistError> {
    #[derive(Default)]
    struct Partial {
        y: Option<f64>,
        height: Option<f64>,
        site_width: Option<f64>,
        site_spacing: Option<f64>,
        x_origin: Option<f64>,
        num_sites: Option<usize>,
    }

    let ctx = Ctx { file };
    let mut rows = Vec::new();
    let mut declared = None;
    let mut current: Option<(Partial, usize)> = None;

    for line in lines(text) {
        let t = &line.tokens;
        match (t[0], current.as_mut()) {
            ("NumRows", None) => {
                declared = Some(ctx.count(&line, Some(ctx.header_value(&line)?), "NumRows")?)
            }
            ("CoreRow", None) => current = Some((Partial::default(), line.number)),
            ("CoreRow", Some(_)) => return Err(ctx.malformed(&line, "nested CoreRow")),
            ("End", Some(_)) => {
                let (p, start) = current.take().expect("inside row");
                let missing = |what: &str| NetlistError::MalformedLine {
                    file: file.into(),
                    line: start,
                    context: "CoreRow".into(),
                    reason: format!("row without {what}"),
                };
                let site_width = p.site_width.unwrap_or(1.0);
                let row = Row {
                    y: p.y.ok_or_else(|| missing("Coordinate"))?,
                    height: p.height.ok_or_else(|| missing("Height"))?,
                    site_width,
                    site_spacing: p.site_spacing.unwrap_or(site_width),
                    x_origin: p.x_origin.ok_or_else(|| missing("SubrowOrigin"))?,
                    num_sites: p.num_sites.ok_or_else(|| missing("NumSites"))?,
                };
                if !(row.height > 0.0 && row.site_spacing > 0.0) {
                    return Err(missing("positive height and site spacing"));
                }
                rows.push(row);
            }
            ("End", None) => return Err(ctx.malformed(&line, "End outside of a row")),
            (key, Some((p, _))) => {
                let v = ctx.header_value(&line)?;
                match key {
                    "Coordinate" => p.y = Some(ctx.number(&line, Some(v), "Coordinate")?),
                    "Height" => p.height = Some(ctx.number(&line, Some(v), "Height")?),
                    "Sitewidth" => p.site_width = Some(ctx.number(&line, Some(v), "Sitewidth")?),
                    "Sitespacing" => {
                        p.site_spacing = Some(ctx.number(&line, Some(v), "Sitespacing")?)
                    }
                    "SubrowOrigin" => {
                        p.x_origin = Some(ctx.number(&line, Some(v), "SubrowOrigin")?);
                        // `SubrowOrigin : x NumSites : n`
                        match &t[3..] {
                            [] => {}
                            [k, ":", n] if k.eq_ignore_ascii_case("NumSites") => {
                                p.num_sites = Some(ctx.count(&line, Some(n), "NumSites")?)
                            }
                            _ => return Err(ctx.malformed(&line, "bad SubrowOrigin line")),
                        }
                    }
                    k if k.eq_ignore_ascii_case("NumSites") => {
                        p.num_sites = Some(ctx.count(&line, Some(v), "NumSites")?)
                    }
                    "Siteorient" | "Sitesymmetry" => {}
                    other => warn!("{file}:{}: skipping unknown row key `{other}`", line.number),
                }
            }
            (key, None) => {
                ctx.header_value(&line)?;
                warn!("{file}:{}: skipping unknown header `{key}`", line.number);
            }
        }
    }
    if let Some((_, start)) = current {
        return Err(NetlistError::MalformedLine {
            file: file.into(),
            line: start,
            context: "CoreRow".into(),
            reason: "row not closed by End".into(),
        });
    }
    if let Some(declared) = declared {
        if declared != rows.len() {
            return Err(NetlistError::CountMismatch {
                file: file.into(),
                what: "rows",
                declared,
                found: rows.len(),
            });
        }
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Design assembly

impl Design {
    /// Build and validate a design from in-memory Bookshelf sources.
    pub fn from_sources(src: &BookshelfSources) -> Result<Design, NetlistError> {
        let nodes = parse_nodes(&src.nodes.text, &src.nodes.name)?;
        let nets = parse_nets(&src.nets.text, &src.nets.name)?;
        let pl = parse_pl(&src.pl.text, &src.pl.name)?;
        let rows = match &src.scl {
            Some(scl) => parse_scl(&scl.text, &scl.name)?,
            None => Vec::new(),
        };

        let mut by_name: HashMap<&str, usize> = HashMap::with_capacity(nodes.nodes.len());
        for (i, n) in nodes.nodes.iter().enumerate() {
            if by_name.insert(n.name.as_str(), i).is_some() {
                return Err(NetlistError::DuplicateCellName(n.name.clone()));
            }
        }

        let mut located: Vec<Option<(f64, f64, bool)>> = vec![None; nodes.nodes.len()];
        for rec in &pl {
            let Some(&i) = by_name.get(rec.name.as_str()) else {
                return Err(NetlistError::UnknownCell {
                    file: src.pl.name.clone(),
                    line: rec.line,
                    name: rec.name.clone(),
                });
            };
            if located[i].is_some() {
                return Err(NetlistError::MalformedLine {
                    file: src.pl.name.clone(),
                    line: rec.line,
                    context: rec.name.clone(),
                    reason: "cell placed twice".into(),
                });
            }
            located[i] = Some((rec.x, rec.y, rec.fixed));
        }

        let mut cells = Vec::with_capacity(nodes.nodes.len());
        for (i, n) in nodes.nodes.iter().enumerate() {
            let fixed = n.terminal || matches!(located[i], Some((_, _, true)));
            let cell = if fixed {
                let (x, y, _) =
                    located[i].ok_or_else(|| NetlistError::MissingFixedLocation(n.name.clone()))?;
                Cell::fixed(
                    i,
                    n.name.clone(),
                    n.width,
                    n.height,
                    (x + 0.5 * n.width, y + 0.5 * n.height),
                )
            } else {
                Cell::movable(i, n.name.clone(), n.width, n.height)
            };
            cells.push(cell);
        }

        let mut out_nets = Vec::with_capacity(nets.nets.len());
        for (id, net) in nets.nets.iter().enumerate() {
            let mut pins = Vec::with_capacity(net.pins.len());
            for p in &net.pins {
                let cell = *by_name.get(p.cell.as_str()).ok_or_else(|| {
                    NetlistError::DanglingPinReference {
                        file: src.nets.name.clone(),
                        line: p.line,
                        net: net.name.clone(),
                        cell: p.cell.clone(),
                    }
                })?;
                pins.push(Pin {
                    cell,
                    dx: p.dx,
                    dy: p.dy,
                });
            }
            out_nets.push(Net {
                id,
                name: net.name.clone(),
                pins,
            });
        }

        let region = if rows.is_empty() {
            region_from_locations(&cells, &located)?
        } else {
            let mut r = Region {
                xmin: f64::INFINITY,
                ymin: f64::INFINITY,
                xmax: f64::NEG_INFINITY,
                ymax: f64::NEG_INFINITY,
                rows: Vec::new(),
            };
            for row in &rows {
                r.xmin = r.xmin.min(row.x_origin);
                r.xmax = r.xmax.max(row.x_end());
                r.ymin = r.ymin.min(row.y);
                r.ymax = r.ymax.max(row.y + row.height);
            }
            r.rows = rows;
            r
        };

        Design::new(cells, out_nets, region)
    }
}

/// Region fallback without `.scl`: bounding box of every placed rectangle.
fn region_from_locations(
    cells: &[Cell],
    located: &[Option<(f64, f64, bool)>],
) -> Result<Region, NetlistError> {
    let mut bounds = None::<(f64, f64, f64, f64)>;
    for (cell, loc) in cells.iter().zip(located) {
        if let Some((x, y, _)) = loc {
            let (x1, y1) = (x + cell.width, y + cell.height);
            bounds = Some(match bounds {
                None => (*x, *y, x1, y1),
                Some((a, b, c, d)) => (a.min(*x), b.min(*y), c.max(x1), d.max(y1)),
            });
        }
    }
    let (xmin, ymin, xmax, ymax) = bounds.ok_or_else(|| {
        NetlistError::InvalidRegion("no .scl rows and no placed cells to bound the region".into())
    })?;
    Region::new(xmin, ymin, xmax, ymax)
}

/// Parse the design referenced by an `.aux` manifest. Paths inside the
/// manifest are relative to its directory.
pub fn parse_design(aux_path: impl AsRef<Path>) -> Result<Design, NetlistError> {
    let aux_path = aux_path.as_ref();
    let aux_src = Source::read(aux_path)?;
    let aux = parse_aux(&aux_src.text, &aux_src.name)?;
    let dir = aux_path.parent().unwrap_or_else(|| Path::new("."));
    let require = |slot: &Option<String>, ext: &str| -> Result<PathBuf, NetlistError> {
        match slot {
            Some(f) => Ok(dir.join(f)),
            None => Err(NetlistError::MissingFile(aux_path.with_extension(ext))),
        }
    };
    let sources = BookshelfSources {
        nodes: Source::read(&require(&aux.nodes, "nodes")?)?,
        nets: Source::read(&require(&aux.nets, "nets")?)?,
        pl: Source::read(&require(&aux.pl, "pl")?)?,
        scl: match &aux.scl {
            Some(f) => Some(Source::read(&dir.join(f))?),
            None => None,
        },
    };
    Design::from_sources(&sources)
}

// ---------------------------------------------------------------------------
// Writing

fn check_rows(design: &Design, placement: &Placement) -> Result<(), NetlistError> {
    if placement.len() != design.num_cells() {
        return Err(NetlistError::PlacementSize {
            expected: design.num_cells(),
            found: placement.len(),
        });
    }
    Ok(())
}

/// Write `.pl` text. Coordinates are lower-left corners with six decimals;
/// fixed cells are written at their fixed location with `/FIXED`.
pub fn format_placement<W: Write>(
    design: &Design,
    placement: &Placement,
    mut w: W,
) -> io::Result<()> {
    writeln!(w, "UCLA pl 1.0")?;
    writeln!(w)?;
    for cell in design.cells() {
        let (cx, cy) = cell.fixed_pos.unwrap_or_else(|| placement.get(cell.id));
        let x = cx - 0.5 * cell.width;
        let y = cy - 0.5 * cell.height;
        let suffix = if cell.is_fixed() { " /FIXED" } else { "" };
        writeln!(w, "{}\t{:.6}\t{:.6}\t: N{}", cell.name, x, y, suffix)?;
    }
    Ok(())
}

pub fn write_placement(
    design: &Design,
    placement: &Placement,
    path: impl AsRef<Path>,
) -> Result<(), NetlistError> {
    check_rows(design, placement)?;
    let path = path.as_ref();
    let io_err = |source| NetlistError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut buf = Vec::with_capacity(32 * design.num_cells() + 16);
    format_placement(design, placement, &mut buf).map_err(io_err)?;
    fs::write(path, buf).map_err(io_err)
}

/// Parse `.pl` text against an existing design; every cell must appear.
pub fn placement_from_pl(
    design: &Design,
    text: &str,
    file: &str,
) -> Result<Placement, NetlistError> {
    let records = parse_pl(text, file)?;
    let mut seen = vec![false; design.num_cells()];
    let mut placement = Placement::zeros(design.num_cells());
    for rec in records {
        let id = design
            .cell_id(&rec.name)
            .ok_or_else(|| NetlistError::UnknownCell {
                file: file.into(),
                line: rec.line,
                name: rec.name.clone(),
            })?;
        let cell = &design.cells()[id];
        placement.set(id, (rec.x + 0.5 * cell.width, rec.y + 0.5 * cell.height));
        seen[id] = true;
    }
    if let Some(i) = seen.iter().position(|s| !s) {
        return Err(NetlistError::MissingLocation(
            design.cells()[i].name.clone(),
        ));
    }
    Ok(placement)
}

pub fn read_placement(design: &Design, path: impl AsRef<Path>) -> Result<Placement, NetlistError> {
    let src = Source::read(path.as_ref())?;
    placement_from_pl(design, &src.text, &src.name)
}

/// Write a complete Bookshelf design (`<name>.aux` plus the files it lists)
/// into `dir`. Movable cells are written at `placement` when given, else at
/// the region center. Returns the `.aux` path.
pub fn write_design(
    design: &Design,
    placement: Option<&Placement>,
    dir: impl AsRef<Path>,
    name: &str,
) -> Result<PathBuf, NetlistError> {
    let dir = dir.as_ref();
    let path_of = |ext: &str| dir.join(format!("{name}.{ext}"));
    let write = |ext: &str, bytes: Vec<u8>| {
        let p = path_of(ext);
        fs::write(&p, bytes).map_err(|source| NetlistError::Io { path: p, source })
    };
    fs::create_dir_all(dir).map_err(|source| NetlistError::Io {
        path: dir.to_path_buf(),
        source,
    })?;

    let has_scl = !design.region().rows.is_empty();
    let mut aux = format!("RowBasedPlacement : {name}.nodes {name}.nets {name}.pl");
    if has_scl {
        aux.push_str(&format!(" {name}.scl"));
    }
    aux.push('\n');
    write("aux", aux.into_bytes())?;

    let mut nodes = Vec::new();
    render_nodes(design, &mut nodes).expect("write to Vec");
    write("nodes", nodes)?;

    let mut nets = Vec::new();
    render_nets(design, &mut nets).expect("write to Vec");
    write("nets", nets)?;

    let center = Placement::constant(
        design.num_cells(),
        design.region().center().0,
        design.region().center().1,
    );
    let placement = match placement {
        Some(p) => {
            check_rows(design, p)?;
            p
        }
        None => &center,
    };
    let mut pl = Vec::new();
    format_placement(design, placement, &mut pl).expect("write to Vec");
    write("pl", pl)?;

    if has_scl {
        let mut scl = Vec::new();
        render_scl(&design.region().rows, &mut scl).expect("write to Vec");
        write("scl", scl)?;
    }
    Ok(path_of("aux"))
}

fn render_nodes<W: Write>(design: &Design, mut w: W) -> io::Result<()> {
    writeln!(w, "UCLA nodes 1.0")?;
    writeln!(w)?;
    writeln!(w, "NumNodes : {}", design.num_cells())?;
    writeln!(w, "NumTerminals : {}", design.num_fixed())?;
    for c in design.cells() {
        let mark = match c.kind {
            CellKind::Fixed => "\tterminal",
            CellKind::Movable => "",
        };
        writeln!(w, "\t{}\t{}\t{}{}", c.name, c.width, c.height, mark)?;
    }
    Ok(())
}

fn render_nets<W: Write>(design: &Design, mut w: W) -> io::Result<()> {
    writeln!(w, "UCLA nets 1.0")?;
    writeln!(w)?;
    writeln!(w, "NumNets : {}", design.num_nets())?;
    writeln!(w, "NumPins : {}", design.num_pins())?;
    for net in design.nets() {
        writeln!(w, "NetDegree : {} {}", net.pins.len(), net.name)?;
        for p in &net.pins {
            writeln!(
                w,
                "\t{}\tB : {} {}",
                design.cells()[p.cell].name,
                p.dx,
                p.dy
            )?;
        }
    }
    Ok(())
}

fn render_scl<W: Write>(rows: &[Row], mut w: W) -> io::Result<()> {
    writeln!(w, "UCLA scl 1.0")?;
    writeln!(w)?;
    writeln!(w, "NumRows : {}", rows.len())?;
    writeln!(w)?;
    for r in rows {
        writeln!(w, "CoreRow Horizontal")?;
        writeln!(w, "  Coordinate   : {}", r.y)?;
        writeln!(w, "  Height       : {}", r.height)?;
        writeln!(w, "  Sitewidth    : {}", r.site_width)?;
        writeln!(w, "  Sitespacing  : {}", r.site_spacing)?;
        writeln!(w, "  Siteorient   : 1")?;
        writeln!(w, "  Sitesymmetry : 1")?;
        writeln!(
            w,
            "  SubrowOrigin : {} NumSites : {}",
            r.x_origin, r.num_sites
        )?;
        writeln!(w, "End")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn minimal_sources() -> BookshelfSources {
        BookshelfSources {
            nodes: Source::new(
                "m.nodes",
                "UCLA nodes 1.0\n# two cells\nNumNodes : 2\nNumTerminals : 0\n a 1 1\n b 2 1\n",
            ),
            nets: Source::new(
                "m.nets",
                "UCLA nets 1.0\nNumNets : 1\nNumPins : 2\nNetDegree : 2 n0\n a I\n b O : 0.5 -0.25\n",
            ),
            pl: Source::new("m.pl", "UCLA pl 1.0\na 0 0 : N\nb 3 4 : N\n"),
            scl: Some(Source::new(
                "m.scl",
                "UCLA scl 1.0\nNumRows : 1\nCoreRow Horizontal\n Coordinate : 0\n Height : 10\n \
                 Sitewidth : 1\n Sitespacing : 1\n Siteorient : 1\n Sitesymmetry : 1\n \
                 SubrowOrigin : 0 NumSites : 10\nEnd\n",
            )),
        }
    }

    #[test]
    fn tokenizer_splits_colons() {
        assert_eq!(split_tokens("NumNodes:3"), vec!["NumNodes", ":", "3"]);
        assert_eq!(split_tokens(" a  I : 1 2"), vec!["a", "I", ":", "1", "2"]);
        assert_eq!(split_tokens("x::y"), vec!["x", ":", ":", "y"]);
    }

    #[test]
    fn minimal_design() {
        let d = Design::from_sources(&minimal_sources()).unwrap();
        assert_eq!(d.num_cells(), 2);
        assert_eq!(d.num_nets(), 1);
        assert_eq!((d.region().width(), d.region().height()), (10.0, 10.0));
        assert_eq!(
            d.nets()[0].pins[1],
            Pin {
                cell: 1,
                dx: 0.5,
                dy: -0.25
            }
        );
        assert_eq!(d.nets()[0].pins[0], Pin::at_center(0));
    }

    #[test]
    fn terminals_become_fixed() {
        let mut s = minimal_sources();
        s.nodes.text = "NumNodes : 3\nNumTerminals : 1\na 1 1\nb 1 1\nt 2 2 terminal\n".into();
        s.pl.text = "a 0 0 : N\nb 1 1 : N\nt 2 6 : N /FIXED\n".into();
        let d = Design::from_sources(&s).unwrap();
        assert_eq!(d.num_movable(), 2);
        assert_eq!(d.num_fixed(), 1);
        assert_eq!(d.cells()[2].fixed_pos, Some((3.0, 7.0)));
    }

    #[test]
    fn fixed_marker_in_pl_alone_fixes_cell() {
        let mut s = minimal_sources();
        s.pl.text = "a 0 0 : N /FIXED\nb 1 1\n".into();
        let d = Design::from_sources(&s).unwrap();
        assert!(d.cells()[0].is_fixed());
        assert_eq!(d.cells()[0].fixed_pos, Some((0.5, 0.5)));
    }

    #[test]
    fn dangling_pin_reference() {
        let mut s = minimal_sources();
        s.nets.text = "NetDegree : 2 n0\n a I\n ghost O\n".into();
        match Design::from_sources(&s).unwrap_err() {
            NetlistError::DanglingPinReference {
                line, cell, net, ..
            } => {
                assert_eq!((line, cell.as_str(), net.as_str()), (3, "ghost", "n0"));
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn duplicate_cell_name() {
        let mut s = minimal_sources();
        s.nodes.text = "a 1 1\na 1 1\n".into();
        assert!(matches!(
            Design::from_sources(&s),
            Err(NetlistError::DuplicateCellName(_))
        ));
    }

    #[test]
    fn malformed_lines_report_position() {
        let err = parse_nodes("NumNodes : 1\n a one 1\n", "x.nodes").unwrap_err();
        match err {
            NetlistError::MalformedLine { line, context, .. } => {
                assert_eq!(line, 2);
                assert_eq!(context, "a one 1");
            }
            e => panic!("unexpected {e}"),
        }
        assert!(parse_pl("a 1\n", "x.pl").is_err());
        assert!(parse_nets(" a I\n", "x.nets").is_err());
        assert!(parse_nets("NetDegree : 2\n a I\n", "x.nets").is_err());
        assert!(parse_nets("NetDegree : 1\n a I\n b I\n", "x.nets").is_err());
        assert!(parse_nodes("a 1 1 macro\n", "x.nodes").is_err());
        assert!(parse_nodes("a inf 1\n", "x.nodes").is_err());
    }

    #[test]
    fn header_counts_checked() {
        assert!(matches!(
            parse_nodes("NumNodes : 3\na 1 1\n", "x"),
            Err(NetlistError::CountMismatch {
                what: "nodes",
                declared: 3,
                found: 1,
                ..
            })
        ));
        assert!(matches!(
            parse_nodes("NumTerminals : 1\na 1 1\n", "x"),
            Err(NetlistError::CountMismatch {
                what: "terminals",
                ..
            })
        ));
        assert!(matches!(
            parse_nets("NumPins : 3\nNetDegree : 1\n a\n", "x"),
            Err(NetlistError::CountMismatch { what: "pins", .. })
        ));
    }

    #[test]
    fn unknown_headers_are_skipped() {
        let n = parse_nodes("NumNodes : 1\nFooBar : 7\na 1 1\n", "x").unwrap();
        assert_eq!(n.nodes.len(), 1);
        let aux = parse_aux("RowBasedPlacement : d.nodes d.nets d.wts d.pl\n", "d.aux").unwrap();
        assert_eq!(aux.other, vec!["d.wts".to_string()]);
        assert_eq!(aux.scl, None);
    }

    #[test]
    fn nets_pin_without_direction() {
        let n = parse_nets("NetDegree : 2\n a : 1 2\n b\n", "x").unwrap();
        assert_eq!(n.nets[0].pins[0].dx, 1.0);
        assert_eq!(n.nets[0].name, "net0");
        assert_eq!(n.nets[0].pins[1].cell, "b");
    }

    #[test]
    fn degenerate_nets_allowed() {
        let n = parse_nets("NetDegree : 0 empty\nNetDegree : 1 single\n a\n", "x").unwrap();
        assert_eq!(n.nets.len(), 2);
        assert!(n.nets[0].pins.is_empty());
    }

    #[test]
    fn region_falls_back_to_bounding_box() {
        let mut s = minimal_sources();
        s.scl = None;
        let d = Design::from_sources(&s).unwrap();
        let r = d.region();
        assert_eq!((r.xmin, r.ymin, r.xmax, r.ymax), (0.0, 0.0, 5.0, 5.0));
    }

    #[test]
    fn missing_fixed_location() {
        let mut s = minimal_sources();
        s.nodes.text = "a 1 1 terminal\nb 1 1\n".into();
        s.pl.text = "b 1 1\n".into();
        assert!(matches!(
            Design::from_sources(&s),
            Err(NetlistError::MissingFixedLocation(_))
        ));
    }

    #[test]
    fn scl_rows() {
        let rows = parse_scl(&minimal_sources().scl.unwrap().text, "m.scl").unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].num_sites, 10);
        assert_eq!(rows[0].x_end(), 10.0);
        assert!(parse_scl("CoreRow Horizontal\n Coordinate : 0\n", "x").is_err());
        assert!(parse_scl("NumRows : 2\n", "x").is_err());
    }

    #[test]
    fn placement_text_is_lower_left() {
        let d = Design::from_sources(&minimal_sources()).unwrap();
        let p = Placement::new(vec![1.0, 5.0], vec![1.0, 2.5]);
        let mut buf = Vec::new();
        format_placement(&d, &p, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("a\t0.500000\t0.500000\t: N\n"));
        assert!(text.contains("b\t4.000000\t2.000000\t: N\n"));
        let back = placement_from_pl(&d, &text, "mem.pl").unwrap();
        assert_eq!(back, p);
    }
}
