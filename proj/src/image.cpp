#include "nsr/image.hpp"

#include "nsr/error.hpp"
#include "nsr/rng.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace nsr {

Image::Image(std::size_t height, std::size_t width, double fill)
    : height_(height), width_(width), values_(height * width, fill)
{
    if (height == 0 || width == 0) throw ContractError("Image: height and width must be >= 1");
}

Image::Image(std::size_t height, std::size_t width, std::vector<double> values)
    : height_(height), width_(width), values_(std::move(values))
{
    if (height == 0 || width == 0) throw ContractError("Image: height and width must be >= 1");
    if (values_.size() != height * width) throw ContractError("Image: value count does not match shape");
}

Image Image::random_normal(Shape shape, Rng& rng)
{
    Image out(shape);
    for (auto& v : out.values_) v = rng.normal();
    return out;
}

bool Image::all_finite() const
{
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

static void check_same(const Image& a, const Image& b)
{
    if (a.shape() != b.shape()) throw ContractError("Image: shape mismatch in arithmetic");
}

Image& Image::operator+=(const Image& other)
{
    check_same(*this, other);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
    return *this;
}

Image& Image::operator-=(const Image& other)
{
    check_same(*this, other);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
    return *this;
}

Image& Image::operator*=(double s)
{
    for (auto& v : values_) v *= s;
    return *this;
}

Image& Image::axpy(double s, const Image& other)
{
    check_same(*this, other);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += s * other.values_[i];
    return *this;
}

Image operator+(Image a, const Image& b) { return a += b; }
Image operator-(Image a, const Image& b) { return a -= b; }
Image operator*(double s, Image a) { return a *= s; }

double dot(const Image& a, const Image& b)
{
    check_same(a, b);
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
    return sum;
}

double norm(const Image& a) { return std::sqrt(dot(a, a)); }

double max_abs(const Image& a)
{
    double m = 0.0;
    for (double v : a.values()) m = std::max(m, std::abs(v));
    return m;
}

void require_shape(const Image& x, Shape expected, const char* what)
{
    if (x.shape() != expected) {
        throw ContractError(std::string(what) + ": expected " + std::to_string(expected.height) + "x" +
                            std::to_string(expected.width) + " image, got " + std::to_string(x.height()) +
                            "x" + std::to_string(x.width()));
    }
}

} // namespace nsr
