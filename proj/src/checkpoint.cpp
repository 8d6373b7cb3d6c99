#include "pcnls/checkpoint.hpp"

#include "pcnls/error.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

namespace pcnls
{

namespace
{

template <typename T>
void put(std::vector<unsigned char>& buf, T value)
{
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big)
    std::reverse(std::begin(bytes), std::end(bytes));
  buf.insert(buf.end(), std::begin(bytes), std::end(bytes));
}

template <typename T>
T get(const std::vector<unsigned char>& buf, std::size_t offset)
{
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, buf.data() + offset, sizeof(T));
  if constexpr (std::endian::native == std::endian::big)
    std::reverse(std::begin(bytes), std::end(bytes));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

} // namespace

void write_checkpoint(const std::filesystem::path& path, const Field& f)
{
  std::vector<unsigned char> buf;
  buf.reserve(kCheckpointHeaderBytes + 8 * f.size());
  buf.insert(buf.end(), std::begin(kCheckpointMagic), std::end(kCheckpointMagic));
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(f.grid.dim()));
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(f.grid.points()));
  put<double>(buf, f.grid.half_width());
  put<double>(buf, f.time);
  for (const auto& z : f.values)
  {
    put<float>(buf, static_cast<float>(z.real()));
    put<float>(buf, static_cast<float>(z.imag()));
  }
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw Error("checkpoint: cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out)
    throw Error("checkpoint: write failed for " + path.string());
}

Field read_checkpoint(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error("checkpoint: cannot open " + path.string());
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < kCheckpointHeaderBytes || std::memcmp(buf.data(), kCheckpointMagic, 8) != 0)
    throw Error("checkpoint: bad header in " + path.string());
  const auto dims = get<std::uint32_t>(buf, 8);
  const auto points = get<std::uint32_t>(buf, 12);
  const double L = get<double>(buf, 16);
  const double t = get<double>(buf, 24);
  const Grid g(static_cast<int>(dims), L, static_cast<int>(points));
  if (buf.size() != kCheckpointHeaderBytes + 8 * g.size())
    throw Error("checkpoint: payload size mismatch in " + path.string());
  Field f(g, t);
  for (std::size_t i = 0; i < g.size(); ++i)
  {
    const std::size_t off = kCheckpointHeaderBytes + 8 * i;
    f.values[i] = cplx(get<float>(buf, off), get<float>(buf, off + 4));
  }
  return f;
}

std::filesystem::path latest_checkpoint(const std::filesystem::path& dir)
{
  if (!std::filesystem::is_directory(dir))
    throw Error("checkpoint: no directory " + dir.string());
  std::filesystem::path best;
  double best_t = -1.0;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
  {
    if (entry.path().extension() != ".ckpt")
      continue;
    const Field f = read_checkpoint(entry.path());
    if (f.time > best_t)
    {
      best_t = f.time;
      best = entry.path();
    }
  }
  if (best.empty())
    throw Error("checkpoint: none found in " + dir.string());
  return best;
}

} // namespace pcnls
