// Maps JSON paths ("plant.inertia", "gains.lambda[1]") to the line and column
// where their value starts. Input must already be valid JSON.
#pragma once

#include <cctype>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>

namespace vecstab::cli {

struct TextPosition {
  std::size_t line = 1;
  std::size_t column = 1;
};

class JsonPositions {
 public:
  explicit JsonPositions(std::string_view text) : text_(text) {
    skip_ws();
    if (pos_ < text_.size()) value("");
  }

  /// Position of `path`, or of its nearest recorded ancestor.
  TextPosition find(std::string path) const {
    for (;;) {
      if (auto it = index_.find(path); it != index_.end()) return it->second;
      if (path.empty()) return {};
      const auto cut = path.find_last_of(".[");
      path = cut == std::string::npos ? std::string{} : path.substr(0, cut);
    }
  }

  std::string describe(const std::string& path) const {
    const TextPosition p = find(path);
    return "line " + std::to_string(p.line) + ", column " + std::to_string(p.column);
  }

 private:
  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) advance();
  }

  std::string string_token() {
    std::string out;
    advance();  // opening quote
    while (pos_ < text_.size() && text_[pos_] != '"') {
      if (text_[pos_] == '\\') {
        advance();
        if (pos_ >= text_.size()) break;
      }
      out.push_back(text_[pos_]);
      advance();
    }
    if (pos_ < text_.size()) advance();  // closing quote
    return out;
  }

  void value(const std::string& path) {
    index_.emplace(path, TextPosition{line_, col_});
    const char c = text_[pos_];
    if (c == '{') {
      advance();
      skip_ws();
      while (pos_ < text_.size() && text_[pos_] != '}') {
        const std::string key = string_token();
        skip_ws();
        advance();  // ':'
        skip_ws();
        value(path.empty() ? key : path + "." + key);
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == ',') {
          advance();
          skip_ws();
        }
      }
      if (pos_ < text_.size()) advance();
    } else if (c == '[') {
      advance();
      skip_ws();
      std::size_t i = 0;
      while (pos_ < text_.size() && text_[pos_] != ']') {
        value(path + "[" + std::to_string(i++) + "]");
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == ',') {
          advance();
          skip_ws();
        }
      }
      if (pos_ < text_.size()) advance();
    } else if (c == '"') {
      string_token();
    } else {
      while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) && text_[pos_] != ',' &&
             text_[pos_] != ']' && text_[pos_] != '}')
        advance();
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
  std::map<std::string, TextPosition> index_;
};

}  // namespace vecstab::cli
