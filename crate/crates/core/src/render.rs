//! Sprite compositing into raw RGB frames. PNG encoding happens at the
//! CLI boundary; this module only produces pixel buffers.

use crate::color::Color;
use crate::compile::GameDef;
use crate::engine::GridState;

pub const SPRITE_SIZE: usize = 5;

/// A rendered frame: `height × width` RGB8 pixels, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl FrameImage {
    fn fill(width: usize, height: usize, rgb: (u8, u8, u8)) -> FrameImage {
        let mut pixels = Vec::with_capacity(width * height * 3);
        for _ in 0..width * height {
            pixels.extend_from_slice(&[rgb.0, rgb.1, rgb.2]);
        }
        FrameImage { width, height, pixels }
    }

    #[inline]
    fn put(&mut self, x: usize, y: usize, rgb: (u8, u8, u8)) {
        let at = (y * self.width + x) * 3;
        self.pixels[at] = rgb.0;
        self.pixels[at + 1] = rgb.1;
        self.pixels[at + 2] = rgb.2;
    }
}

/// Paint each cell by compositing the sprites of present objects in
/// collision-layer order (later layers on top, transparent pixels pass
/// through). Objects without a sprite fill the cell with their first
/// color. Cell size is `5 × scale` pixels.
pub fn render_frame(game: &GameDef, state: &GridState, scale: usize) -> FrameImage {
    let scale = scale.max(1);
    let cell_px = SPRITE_SIZE * scale;
    let width = state.width as usize * cell_px;
    let height = state.height as usize * cell_px;
    let mut frame = FrameImage::fill(width, height, (0, 0, 0));

    for row in 0..state.height as usize {
        for col in 0..state.width as usize {
            let cell = state.cell_index(row, col);
            for layer in &game.layers.layers {
                for &object in layer {
                    if !state.has_object(object, cell) {
                        continue;
                    }
                    let record = &game.objects.objects[object as usize];
                    match &record.sprite {
                        Some(sprite) => {
                            for (sy, sprite_row) in sprite.iter().enumerate() {
                                for (sx, px) in sprite_row.iter().enumerate() {
                                    let Some(idx) = px else { continue };
                                    let Some(Color::Rgb(r, g, b)) = record.colors.get(*idx as usize).copied()
                                    else {
                                        continue;
                                    };
                                    for dy in 0..scale {
                                        for dx in 0..scale {
                                            frame.put(
                                                col * cell_px + sx * scale + dx,
                                                row * cell_px + sy * scale + dy,
                                                (r, g, b),
                                            );
                                        }
                                    }
                                }
                            }
                        }
                        None => {
                            if let Some(Color::Rgb(r, g, b)) = record.colors.first().copied() {
                                for dy in 0..cell_px {
                                    for dx in 0..cell_px {
                                        frame.put(col * cell_px + dx, row * cell_px + dy, (r, g, b));
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    frame
}
