#pragma once

namespace softgrip {

// Axis-aligned pixel rectangle, origin top-left.
struct Rect {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    bool operator==(const Rect&) const = default;

    long long area() const { return static_cast<long long>(w) * h; }

    bool inside(int image_w, int image_h) const {
        return x >= 0 && y >= 0 && w > 0 && h > 0 && x + w <= image_w && y + h <= image_h;
    }
};

} // namespace softgrip
