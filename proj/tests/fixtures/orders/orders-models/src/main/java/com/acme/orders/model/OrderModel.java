package com.acme.orders.model;

import java.math.BigDecimal;

/**
 * Shared order representation used by every service.
 */
public class OrderModel {
    private String id;
    private String customerId;
    private BigDecimal total;
    private String status = "NEW";

    public OrderModel(String id, String customerId, BigDecimal total) {
        this.id = id;
        this.customerId = customerId;
        this.total = total;
    }

    public String getId() {
        return id;
    }

    public String getStatus() {
        return status;
    }

    public void setStatus(String status) {
        this.status = status;
    }
}
