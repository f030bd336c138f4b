"""Figure re-injection helpers: pad to a square canvas and resize."""

from __future__ import annotations

import base64
import io
from pathlib import Path

from PIL import Image


def pad_to_square(image: Image.Image, size: int, background=(255, 255, 255)) -> Image.Image:
    """Letterbox onto a white square of ``size`` x ``size`` pixels."""
    image = image.convert("RGB")
    scale = size / max(image.width, image.height)
    resized = image.resize((max(1, round(image.width * scale)), max(1, round(image.height * scale))))
    canvas = Image.new("RGB", (size, size), background)
    canvas.paste(resized, ((size - resized.width) // 2, (size - resized.height) // 2))
    return canvas


def figure_part_b64(path: Path, size: int) -> str:
    """Base64 PNG of the figure padded to the injection size."""
    with Image.open(path) as img:
        squared = pad_to_square(img, size)
    buf = io.BytesIO()
    squared.save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


def image_file_b64(path: Path) -> tuple[str, str]:
    """(media_type, base64) for an on-disk question image, unresized."""
    media = "image/png" if Path(path).suffix.lower() == ".png" else "image/jpeg"
    return media, base64.b64encode(Path(path).read_bytes()).decode("ascii")
