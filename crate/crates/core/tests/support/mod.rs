pub mod rd_oracle;
