#pragma once

// Shared fixtures. The classifier cache lives next to the test binaries so
// the 52-class training cost is paid once per build tree.

#include <cmath>
#include <vector>

#include "ambigen/classifier.hpp"
#include "ambigen/font.hpp"
#include "ambigen/geometry.hpp"
#include "ambigen/rng.hpp"

namespace testutil {

inline const ambigen::FontFile& font() {
    static ambigen::FontFile f(ambigen::find_system_font());
    return f;
}

inline const ambigen::LetterClassifier& classifier() {
    static ambigen::LetterClassifier c =
        ambigen::load_or_train_classifier(font(), "ambigen-test-classifier.bin", 11);
    return c;
}

// Smooth closed blob: anchors on a ring with jittered radii, Catmull-Rom
// handles. C1 everywhere, so finite differences see no corner events.
inline ambigen::BezierPath random_blob(ambigen::Rng& rng, ambigen::Vec2 center, double rmin,
                                       double rmax, int n, bool reversed) {
    using ambigen::Vec2;
    std::vector<Vec2> anchors(n);
    for (int i = 0; i < n; i++) {
        double ang = 2 * M_PI * i / n + rng.uniform(-0.1, 0.1);
        double rad = rng.uniform(rmin, rmax);
        anchors[i] = {center.x + rad * std::cos(ang), center.y + rad * std::sin(ang)};
    }
    if (reversed) std::reverse(anchors.begin(), anchors.end());
    std::vector<Vec2> pts;
    for (int i = 0; i < n; i++) {
        Vec2 prev = anchors[(i + n - 1) % n];
        Vec2 cur = anchors[i];
        Vec2 next = anchors[(i + 1) % n];
        Vec2 next2 = anchors[(i + 2) % n];
        pts.push_back(cur);
        pts.push_back(cur + (next - prev) * (1.0 / 6));
        pts.push_back(next - (next2 - cur) * (1.0 / 6));
    }
    return ambigen::BezierPath(std::move(pts));
}

// with_hole adds a reversed inner contour, exercising the nonzero fill rule
inline ambigen::Glyph random_glyph(ambigen::Rng& rng, bool with_hole) {
    ambigen::Glyph g;
    g.paths.push_back(random_blob(rng, {0.5, 0.5}, 0.18, 0.38, 7, false));
    if (with_hole) g.paths.push_back(random_blob(rng, {0.5, 0.5}, 0.05, 0.09, 5, true));
    return g;
}

} // namespace testutil
