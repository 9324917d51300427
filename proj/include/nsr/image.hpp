#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace nsr {

struct Shape {
    std::size_t height = 0;
    std::size_t width = 0;

    std::size_t size() const { return height * width; }
    friend bool operator==(const Shape&, const Shape&) = default;
};

class Rng;

/// Row-major 2D real-valued grid. Elements of both X and Y.
class Image {
public:
    Image() = default;
    Image(std::size_t height, std::size_t width, double fill = 0.0);
    explicit Image(Shape shape, double fill = 0.0) : Image(shape.height, shape.width, fill) {}
    Image(std::size_t height, std::size_t width, std::vector<double> values);

    static Image random_normal(Shape shape, Rng& rng);

    std::size_t height() const { return height_; }
    std::size_t width() const { return width_; }
    Shape shape() const { return {height_, width_}; }
    std::size_t size() const { return values_.size(); }

    double& operator()(std::size_t row, std::size_t col) { return values_[row * width_ + col]; }
    double operator()(std::size_t row, std::size_t col) const { return values_[row * width_ + col]; }
    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }
    const std::vector<double>& data() const { return values_; }

    bool all_finite() const;

    Image& operator+=(const Image& other);
    Image& operator-=(const Image& other);
    Image& operator*=(double s);
    /// this += s * other
    Image& axpy(double s, const Image& other);

    friend bool operator==(const Image&, const Image&) = default;

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<double> values_;
};

Image operator+(Image a, const Image& b);
Image operator-(Image a, const Image& b);
Image operator*(double s, Image a);

double dot(const Image& a, const Image& b);
double norm(const Image& a);
double max_abs(const Image& a);

/// Throws ContractError naming `what` when the shapes differ.
void require_shape(const Image& x, Shape expected, const char* what);

} // namespace nsr
