//! Browser bindings: draw rotor blobs and sandpiles onto a canvas and run the
//! goldbug line. See `www/index.html`.

use wasm_bindgen::prelude::*;

use rotorlab::goldbug::GoldbugSystem;
use rotorlab::render::{render_rotor, render_sandpile, Image};
use rotorlab::rotor::run;
use rotorlab::sandpile::{stabilize, Order, SandVariant};

/// Largest sizes the page accepts, to keep the tab responsive.
pub const MAX_BUGS: u32 = 1_000_000;
pub const MAX_GRAINS: u32 = 200_000;

/// RGBA pixels ready for `ImageData`.
#[wasm_bindgen]
pub struct Frame {
    width: u32,
    height: u32,
    rgba: Vec<u8>,
}

#[wasm_bindgen]
impl Frame {
    #[wasm_bindgen(getter)]
    pub fn width(&self) -> u32 {
        self.width
    }

    #[wasm_bindgen(getter)]
    pub fn height(&self) -> u32 {
        self.height
    }

    /// Copies the pixels out as a `Uint8Array`.
    #[wasm_bindgen(getter)]
    pub fn rgba(&self) -> Vec<u8> {
        self.rgba.clone()
    }
}

impl From<Image> for Frame {
    fn from(img: Image) -> Self {
        Frame {
            width: img.width,
            height: img.height,
            rgba: img.rgba(),
        }
    }
}

pub fn rotor_frame(bugs: u32) -> Result<Frame, String> {
    if bugs > MAX_BUGS {
        return Err(format!("at most {MAX_BUGS} bugs"));
    }
    let (blob, _) = run(bugs as u64).map_err(|e| e.to_string())?;
    Ok(render_rotor(&blob).into())
}

pub fn sandpile_frame(grains: u32, variant: &str) -> Result<Frame, String> {
    if grains > MAX_GRAINS {
        return Err(format!("at most {MAX_GRAINS} grains"));
    }
    let v: SandVariant = variant
        .parse()
        .map_err(|e: rotorlab::Error| e.to_string())?;
    let pile = stabilize(grains as u64, v, Order::Systematic).map_err(|e| e.to_string())?;
    Ok(render_sandpile(&pile).into())
}

pub fn goldbug_summary(bugs: u32) -> Result<String, String> {
    let mut g = GoldbugSystem::new();
    let (left, right) = g.run_bugs(bugs as u64).map_err(|e| e.to_string())?;
    let ratio = if left == 0 {
        String::from("-")
    } else {
        format!("{:.6}", right as f64 / left as f64)
    };
    Ok(format!(
        "{bugs} bugs: {left} left, {right} right, ratio {ratio}\narrows from site 1: {}",
        g.digit_string()
    ))
}

#[wasm_bindgen(js_name = renderRotor)]
pub fn render_rotor_js(bugs: u32) -> Result<Frame, JsError> {
    rotor_frame(bugs).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = renderSandpile)]
pub fn render_sandpile_js(grains: u32, variant: &str) -> Result<Frame, JsError> {
    sandpile_frame(grains, variant).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = goldbug)]
pub fn goldbug_js(bugs: u32) -> Result<String, JsError> {
    goldbug_summary(bugs).map_err(|e| JsError::new(&e))
}
